"""Two-mode Gaussian states and the frame changes as symplectic maps.

Phase-space ordering is ``(x_A, p_A, x_B, p_B)``; the covariance matrix is
``sigma_ij = <{dr_i, dr_j}>/2`` so a pure single-mode state has
``det sigma = (hbar/2)^2``.

A transform matrix ``S`` holds Heisenberg-picture coefficients,
``T^dagger r_i T = sum_j S_ij r_j``; for the transformed state ``T rho T^dagger``
the moments therefore update as ``mean -> S mean``, ``sigma -> S sigma S^T``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import log, sqrt

import numpy as np

from .exceptions import InputError, InvalidStateError

OMEGA = np.array(
    [
        [0.0, 1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0, 0.0],
    ]
)


def _readonly(a) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class GaussianState:
    mean: np.ndarray
    cov: np.ndarray
    hbar: float = 1.0

    def __post_init__(self):
        mean, cov = _readonly(self.mean), _readonly(self.cov)
        if mean.shape != (4,) or cov.shape != (4, 4):
            raise InputError("expected a 4-vector mean and a 4x4 covariance")
        if np.max(np.abs(cov - cov.T)) > 1e-12 * max(1.0, np.max(np.abs(cov))):
            raise InvalidStateError("covariance matrix is not symmetric")
        # Robertson-Schroedinger bound: sigma + i hbar Omega / 2 >= 0
        lo = np.linalg.eigvalsh(cov + 0.5j * self.hbar * OMEGA)[0]
        if lo < -1e-10 * max(1.0, np.max(np.abs(cov))):
            raise InvalidStateError(f"covariance violates the uncertainty bound ({lo:.3e})")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    def purity(self) -> float:
        return float((self.hbar / 2) ** 2 / sqrt(np.linalg.det(self.cov)))

    def reduced_cov(self, mode: int) -> np.ndarray:
        sl = slice(2 * mode, 2 * mode + 2)
        return self.cov[sl, sl]


@dataclass(frozen=True, eq=False)
class SymplecticTransform:
    matrix: np.ndarray
    displacement: np.ndarray = field(default_factory=lambda: np.zeros(4))
    description: str = ""

    def __post_init__(self):
        s = _readonly(self.matrix)
        disp = _readonly(self.displacement)
        if s.shape != (4, 4) or disp.shape != (4,):
            raise InputError("expected a 4x4 matrix and a 4-vector displacement")
        err = np.max(np.abs(s @ OMEGA @ s.T - OMEGA))
        if err > 1e-10:
            raise InputError(f"matrix is not symplectic (deviation {err:.3e})")
        object.__setattr__(self, "matrix", s)
        object.__setattr__(self, "displacement", disp)

    def __matmul__(self, other: "SymplecticTransform") -> "SymplecticTransform":
        # operator product self*other: Heisenberg coefficients multiply in the same order
        return SymplecticTransform(
            self.matrix @ other.matrix,
            self.matrix @ other.displacement + self.displacement,
        )


def product_gaussian(a: float, b: float, width_a: float, width_b: float, hbar: float = 1.0) -> GaussianState:
    """Minimum-uncertainty product state with real amplitudes centred at ``a`` and ``b``."""
    if width_a <= 0 or width_b <= 0:
        raise InputError("widths must be positive")
    cov = np.diag([width_a**2, hbar**2 / (4 * width_a**2), width_b**2, hbar**2 / (4 * width_b**2)])
    return GaussianState(np.array([a, 0.0, b, 0.0]), cov, hbar)


def identity_transform() -> SymplecticTransform:
    return SymplecticTransform(np.eye(4), description="identity")


def _parity_a() -> np.ndarray:
    return np.diag([-1.0, -1.0, 1.0, 1.0])


def symplectic_for_position_swap() -> SymplecticTransform:
    """Parity on A times ``exp(i X_A P_B / hbar)``:
    ``x_A -> -x_A, x_B -> x_B - x_A, p_A -> -p_A - p_B, p_B -> p_B``."""
    shift = np.eye(4)
    shift[2, 0] = -1.0  # x_B -> x_B - x_A
    shift[1, 3] = 1.0  # p_A -> p_A + p_B
    return SymplecticTransform(_parity_a() @ shift, description="position swap")


def symplectic_for_momentum_swap(m_a: float, m_b: float) -> SymplecticTransform:
    """Parity on A, dilation of B by ``alpha = ln(mu/m_B)``, then the
    mass-weighted shear ``exp(-i (m_B/m_A) X_B P_A / hbar)``.

    Momentum rows: ``{-p_A, mu (p_B/m_B - p_A/m_A)}``.  The canonical
    partner of the dilated momentum is ``x_B -> (m_B/mu) x_B``.
    """
    if m_a <= 0 or m_b <= 0:
        raise InputError("masses must be positive")
    mu = m_a * m_b / (m_a + m_b)
    alpha = log(mu / m_b)
    ratio = m_b / m_a
    shear = np.eye(4)
    shear[0, 2] = ratio  # x_A -> x_A + (m_B/m_A) x_B
    shear[3, 1] = -ratio  # p_B -> p_B - (m_B/m_A) p_A
    dilation = np.diag([1.0, 1.0, np.exp(-alpha), np.exp(alpha)])
    return SymplecticTransform(_parity_a() @ dilation @ shear, description="momentum swap")


def apply_symplectic(state: GaussianState, s: SymplecticTransform) -> GaussianState:
    m = s.matrix
    return GaussianState(m @ state.mean + s.displacement, m @ state.cov @ m.T, state.hbar)


def single_mode_entropy(nu: float) -> float:
    """Von Neumann entropy (nats) of a mode with symplectic eigenvalue ``nu >= 1``
    (in units of ``hbar/2``)."""
    if nu < 1 - 1e-12:
        raise InvalidStateError(f"symplectic eigenvalue {nu} below 1")
    if nu <= 1 + 1e-15:
        return 0.0
    hi, lo = (nu + 1) / 2, (nu - 1) / 2
    return float(hi * log(hi) - lo * log(lo))


def residual_entanglement(state: GaussianState, mode: int = 0) -> tuple[float, float]:
    """Reduced purity and entanglement entropy of a pure two-mode state."""
    if abs(state.purity() - 1.0) > 1e-6:
        raise InvalidStateError(f"global state is mixed (purity {state.purity():.8f})")
    nu = 2 * sqrt(np.linalg.det(state.reduced_cov(mode))) / state.hbar
    nu = max(nu, 1.0)
    return 1.0 / nu, single_mode_entropy(nu)


def crossing_term_params(a: float, delta: float, Delta: float) -> tuple[float, float]:
    """Shift ``alpha`` and width ``zeta`` of the u-Gaussian in the
    transformed product state; returns ``(alpha, zeta)``."""
    if delta <= 0 or Delta <= 0:
        raise InputError("widths must be positive")
    zeta = delta * Delta / sqrt(delta**2 + Delta**2)
    return a * (zeta / Delta) ** 2, zeta
