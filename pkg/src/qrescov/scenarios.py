"""Canonical states: the two-slit diatomic molecule, textbook qubit states
and seeded random generators."""
from __future__ import annotations

from dataclasses import dataclass
from math import prod, sqrt
from typing import Sequence

import numpy as np
from scipy.stats import unitary_group

from .exceptions import InputError
from .frames import LatticeGrid, apply_frame_transform, parity_conditional_shift
from .hilbert import DensityMatrix, PureState, check_dims


@dataclass(frozen=True)
class TwoSlitConfig:
    """Atoms A and B at sites ``(i, j)`` or ``(i+k, j+k)`` in superposition."""

    half_width: int
    i: int
    j: int
    k: int

    def __post_init__(self):
        if self.half_width < 1:
            raise InputError("half_width must be >= 1")
        if 0 in (self.i, self.j, self.k):
            raise InputError("i, j and k must be nonzero integers")
        L = self.half_width
        needed = {"i": self.i, "i+k": self.i + self.k, "j": self.j, "j+k": self.j + self.k, "j-i": self.j - self.i}
        bad = [f"{name}={v}" for name, v in needed.items() if abs(v) > L]
        if bad:
            raise InputError(f"sites outside [-{L}, {L}]: {', '.join(bad)}")

    @property
    def grid(self) -> LatticeGrid:
        return LatticeGrid(self.half_width)

    @property
    def dims(self) -> tuple[int, int]:
        xi = 2 * self.half_width + 1
        return (xi, xi)


def two_slit_state(cfg: TwoSlitConfig) -> PureState:
    """``(|i>|j> + |i+k>|j+k>)/sqrt(2)`` with dimensionless amplitudes."""
    L = cfg.half_width
    v = np.zeros(prod(cfg.dims), dtype=complex)
    for a, b in ((cfg.i, cfg.j), (cfg.i + cfg.k, cfg.j + cfg.k)):
        v[np.ravel_multi_index((a + L, b + L), cfg.dims)] = 1 / sqrt(2)
    return PureState(v, cfg.dims)


def two_slit_transformed(cfg: TwoSlitConfig, boundary_mode: str = "wrap") -> PureState:
    """The two-slit state seen from atom A.  Valid configurations never touch
    the boundary, so both modes give the same state."""
    t = parity_conditional_shift(cfg.grid, n_observed=1, boundary_mode=boundary_mode)
    out, _ = apply_frame_transform(two_slit_state(cfg), t, leak_threshold=0.0)
    return out


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def random_pure_state(dims: Sequence[int], seed=None) -> PureState:
    """Haar-random pure state (normalized complex Gaussian vector)."""
    dims = check_dims(dims)
    rng = _rng(seed)
    d = prod(dims)
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return PureState.from_unnormalized(v, dims)


def random_state(dims: Sequence[int], rank: int = 1, seed=None) -> DensityMatrix:
    """Convex mixture of ``rank`` Haar pure states with flat-Dirichlet weights."""
    dims = check_dims(dims)
    d = prod(dims)
    if not 1 <= rank <= d:
        raise InputError(f"rank must lie in [1, {d}], got {rank}")
    rng = _rng(seed)
    vecs = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    vecs /= np.linalg.norm(vecs, axis=0)
    weights = rng.dirichlet(np.ones(rank)) if rank > 1 else np.ones(1)
    rho = (vecs * weights) @ vecs.conj().T
    rho = (rho + rho.conj().T) / 2
    return DensityMatrix(rho / np.trace(rho).real, dims, check_psd=False)


def random_unitary(d: int, seed=None) -> np.ndarray:
    """Haar-random unitary."""
    return unitary_group.rvs(d, random_state=_rng(seed))


def bell_state() -> PureState:
    return PureState(np.array([1, 0, 0, 1]) / sqrt(2), (2, 2))


def classical_correlated() -> DensityMatrix:
    return DensityMatrix(np.diag([0.5, 0, 0, 0.5]), (2, 2))


def plus_zero() -> PureState:
    return PureState(np.array([1, 0, 1, 0]) / sqrt(2), (2, 2))


SCENARIOS = {
    "bell": bell_state,
    "classical": classical_correlated,
    "plus0": plus_zero,
    "mixed": lambda: DensityMatrix.maximally_mixed((2, 2)),
    "product00": lambda: PureState.basis((2, 2), (0, 0)),
}


def named_state(name: str):
    try:
        return SCENARIOS[name]()
    except KeyError:
        raise InputError(f"unknown scenario {name!r}; choose from {sorted(SCENARIOS)}") from None
