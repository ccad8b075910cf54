"""Quantum resource accounting across quantum reference frames."""

__version__ = "0.1.0"
