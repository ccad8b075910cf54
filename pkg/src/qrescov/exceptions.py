"""Exception hierarchy shared by all modules."""


class QRescovError(Exception):
    """Base class for every error raised by this package."""


class InputError(QRescovError, ValueError):
    """Malformed or inconsistent user input (bad dims, indices, widths, ...)."""


class InvalidStateError(InputError):
    """A matrix or vector fails the invariants of a quantum state."""


class DimensionError(InputError):
    """Operands live on incompatible tensor-product spaces."""


class NotUnbiasedError(InputError):
    """An observable set is not maximally unbiased with respect to its partner."""


class LeakageError(QRescovError):
    """Probability mass lost at the lattice boundary exceeds the allowed threshold."""


class InvariantError(QRescovError, ArithmeticError):
    """A proven identity failed numerically; results must not be trusted."""
