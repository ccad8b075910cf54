"""Reference-frame machinery on a symmetric position lattice.

Lattice sites are labelled by integers in ``[-L, L]``; array index ``n``
corresponds to site ``n - L``.  Particle 0 is the one promoted to
reference frame by :func:`parity_conditional_shift`.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import isclose, pi, prod
from typing import Literal, Sequence

import numpy as np

from .exceptions import DimensionError, InputError, LeakageError
from .hilbert import DensityMatrix, PureState, State, as_density
from .resources import ObservableBasis, ObservableSet, ProjectiveMeasurement

BoundaryMode = Literal["wrap", "truncate"]
BOUNDARY_MODES = ("wrap", "truncate")
DEFAULT_LEAK_THRESHOLD = 1e-3


def fourier_matrix(d: int) -> np.ndarray:
    if d < 2:
        raise InputError("dimension must be >= 2")
    k = np.arange(d)
    return np.exp(2j * pi * np.outer(k, k) / d) / np.sqrt(d)


def fourier_mu_basis(d: int, subsystem: int = 0) -> ObservableBasis:
    """Discrete-Fourier basis, unbiased to the computational one."""
    return ObservableBasis(subsystem, fourier_matrix(d))


def mu_partner(basis: ObservableBasis) -> ObservableBasis:
    """Fourier partner of an arbitrary basis: ``|abar_j> = sum_k F_kj |a_k>``."""
    return ObservableBasis(basis.subsystem, basis.vectors @ fourier_matrix(basis.dim))


def mu_partner_set(obs: ObservableSet) -> ObservableSet:
    return ObservableSet([mu_partner(b) for b in obs.bases])


def position_set(dims: Sequence[int]) -> ObservableSet:
    return ObservableSet.computational(dims)


def momentum_set(dims: Sequence[int]) -> ObservableSet:
    return ObservableSet([fourier_mu_basis(d, k) for k, d in enumerate(dims)])


@dataclass(frozen=True)
class LatticeGrid:
    """Symmetric grid of ``2L+1`` sites with ``delta_q * delta_p = 2 pi hbar / xi``."""

    half_width: int
    delta_q: float = 1.0
    delta_p: float | None = None
    hbar: float = 1.0

    def __post_init__(self):
        if self.half_width < 1:
            raise InputError("half_width must be a positive integer")
        if self.delta_q <= 0 or self.hbar <= 0:
            raise InputError("delta_q and hbar must be positive")
        expected = 2 * pi * self.hbar / (self.xi * self.delta_q)
        if self.delta_p is None:
            object.__setattr__(self, "delta_p", expected)
        elif not isclose(self.delta_p, expected, rel_tol=1e-12):
            raise InputError(f"delta_p = {self.delta_p} violates delta_q*delta_p = 2 pi hbar/xi")

    @property
    def xi(self) -> int:
        return 2 * self.half_width + 1

    @property
    def sites(self) -> np.ndarray:
        return np.arange(-self.half_width, self.half_width + 1)

    def index(self, site: int) -> int:
        if abs(site) > self.half_width:
            raise InputError(f"site {site} outside [-{self.half_width}, {self.half_width}]")
        return site + self.half_width

    def wrap(self, site):
        """Map integers onto ``[-L, L]`` modulo ``xi``."""
        return (np.asarray(site) + self.half_width) % self.xi - self.half_width


@dataclass(frozen=True, eq=False)
class FrameTransform:
    """Frame change on ``n`` lattice particles.

    In wrap mode ``matrix`` is a permutation (exactly unitary).  In truncate
    mode columns whose image leaves the grid are zero, so norm can leak and
    callers must renormalize (see :func:`apply_frame_transform`).
    """

    matrix: np.ndarray
    boundary_mode: str
    dims: tuple[int, ...]
    description: str = ""

    @property
    def is_unitary(self) -> bool:
        return self.boundary_mode == "wrap"


def _shift_index_map(grid: LatticeGrid, n_observed: int, boundary_mode: str):
    """Source/target flat indices of ``|u>|v_1>..|v_n> -> |-u>|v_1-u>..|v_n-u>``."""
    xi = grid.xi
    dims = (xi,) * (n_observed + 1)
    coords = np.indices(dims).reshape(n_observed + 1, -1) - grid.half_width
    u = coords[0]
    image = np.vstack([-u] + [coords[k] - u for k in range(1, n_observed + 1)])
    if boundary_mode == "wrap":
        image = grid.wrap(image)
        keep = np.ones(image.shape[1], dtype=bool)
    else:
        keep = np.all(np.abs(image) <= grid.half_width, axis=0)
    src = np.arange(prod(dims))[keep]
    dst = np.ravel_multi_index(tuple(image[:, keep] + grid.half_width), dims)
    return dims, src, dst


def parity_conditional_shift(
    grid: LatticeGrid, n_observed: int = 1, boundary_mode: str = "wrap"
) -> FrameTransform:
    """Parity on particle 0 followed by the displacement of every other
    particle conditioned on particle 0's position."""
    if n_observed < 1:
        raise InputError("n_observed must be >= 1")
    if boundary_mode not in BOUNDARY_MODES:
        raise InputError(f"boundary_mode must be one of {BOUNDARY_MODES}")
    dims, src, dst = _shift_index_map(grid, n_observed, boundary_mode)
    d = prod(dims)
    m = np.zeros((d, d))
    m[dst, src] = 1.0
    m.setflags(write=False)
    return FrameTransform(
        m, boundary_mode, dims, f"parity-conditional shift, L={grid.half_width}, n={n_observed}"
    )


def apply_frame_transform(
    state: State, t: FrameTransform, leak_threshold: float = DEFAULT_LEAK_THRESHOLD
) -> tuple[State, float]:
    """Transform and renormalize; returns ``(state', leaked_mass)``.

    Raises :class:`LeakageError` if the lost norm exceeds ``leak_threshold``.
    """
    m = t.matrix
    if isinstance(state, PureState):
        if state.amplitudes.size != m.shape[0]:
            raise DimensionError("transform does not match state dimension")
        v = m @ state.amplitudes
        kept = float(np.vdot(v, v).real)
    else:
        rho = as_density(state)
        if rho.dim != m.shape[0]:
            raise DimensionError("transform does not match state dimension")
        r = m @ rho.data @ m.conj().T
        kept = float(np.trace(r).real)
    leaked = 1.0 - kept
    if leaked <= 1e-12:  # float noise of an exact permutation
        leaked = 0.0
    if leaked > leak_threshold:
        raise LeakageError(f"leaked mass {leaked:.3e} exceeds threshold {leak_threshold:g}")
    if kept <= 0:
        raise LeakageError("transform annihilated the state")
    if isinstance(state, PureState):
        return PureState(v / np.sqrt(kept), state.dims), leaked
    r = r / kept
    return DensityMatrix((r + r.conj().T) / 2, rho.dims, check_psd=False), leaked


def transform_context(
    rho: State,
    sets: Sequence[ObservableSet | ProjectiveMeasurement],
    t,
    picture: Literal["AP", "PP"],
) -> tuple[DensityMatrix, list]:
    """Active picture: ``{T rho T^dagger, O}``.  Passive picture:
    ``{rho, T^dagger O T}``, returned as nonlocal projective measurements."""
    rho = as_density(rho)
    u = np.asarray(getattr(t, "matrix", t), dtype=complex)
    if u.shape != (rho.dim, rho.dim):
        raise DimensionError("transform does not match state dimension")
    if picture == "AP":
        out = u @ rho.data @ u.conj().T
        return DensityMatrix((out + out.conj().T) / 2, rho.dims, check_psd=False), list(sets)
    if picture == "PP":
        moved = []
        for s in sets:
            m = s if isinstance(s, ProjectiveMeasurement) else s.measurement(rho.dims)
            moved.append(m.conjugated(u))
        return rho, moved
    raise InputError("picture must be 'AP' or 'PP'")


def _diagonal_probs(state: State) -> np.ndarray:
    if isinstance(state, PureState):
        return np.abs(state.amplitudes) ** 2
    return np.real(np.diag(as_density(state).data))


def galilean_relative_invariance(state: State, grid: LatticeGrid) -> tuple[float, float]:
    """``<X_C - X_B>`` before and after moving to particle A's frame (wrap mode).

    ``state`` lives on three lattice particles ordered (A, B, C).  Returned
    values are lengths (multiples of ``delta_q``).
    """
    xi = grid.xi
    if tuple(state.dims) != (xi, xi, xi):
        raise DimensionError(f"expected three particles on a {xi}-site grid, got dims {state.dims}")
    t = parity_conditional_shift(grid, n_observed=2, boundary_mode="wrap")
    after, _ = apply_frame_transform(state, t, leak_threshold=0.0)
    sites = grid.sites
    sep = (sites[None, None, :] - sites[None, :, None]).astype(float)
    sep = np.broadcast_to(sep, (xi, xi, xi)).ravel()
    before = float(_diagonal_probs(state) @ sep) * grid.delta_q
    return before, float(_diagonal_probs(after) @ sep) * grid.delta_q
