"""Dense linear-algebra substrate: states on tensor-product spaces, partial
trace, Hermitian eigendecomposition and entropies (natural log throughout).
"""
from __future__ import annotations

from dataclasses import dataclass
from math import prod
from typing import Sequence, Union

import numpy as np

from .exceptions import DimensionError, InputError, InvalidStateError

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-10
UNITARY_TOL = 1e-10


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex, copy=True)
    a.setflags(write=False)
    return a


def check_dims(dims: Sequence[int]) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if not dims:
        raise DimensionError("at least one subsystem is required")
    if any(d < 2 for d in dims):
        raise DimensionError(f"every subsystem dimension must be >= 2, got {dims}")
    return dims


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Trace-one positive semidefinite Hermitian operator.

    ``dims`` fixes the subsystem ordering for the lifetime of the object;
    every bipartite operation refers to subsystems by their index here.
    Pass ``check_psd=False`` only for matrices produced by a CPTP map from
    an already validated state.
    """

    data: np.ndarray
    dims: tuple[int, ...]

    def __init__(self, data, dims: Sequence[int], *, check_psd: bool = True):
        dims = check_dims(dims)
        m = _frozen(data)
        d = prod(dims)
        if m.shape != (d, d):
            raise DimensionError(f"matrix shape {m.shape} does not match dims {dims}")
        if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL:
            raise InvalidStateError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1.0) > TRACE_TOL:
            raise InvalidStateError(f"trace {np.trace(m).real:.3e} differs from 1")
        if check_psd:
            lo = np.linalg.eigvalsh(m)[0]
            if lo < -PSD_TOL:
                raise InvalidStateError(f"negative eigenvalue {lo:.3e}")
        object.__setattr__(self, "data", m)
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @property
    def n_subsystems(self) -> int:
        return len(self.dims)

    def purity(self) -> float:
        return float(np.real(np.einsum("ij,ji->", self.data, self.data)))

    @classmethod
    def maximally_mixed(cls, dims: Sequence[int]) -> "DensityMatrix":
        dims = check_dims(dims)
        d = prod(dims)
        return cls(np.eye(d) / d, dims, check_psd=False)


@dataclass(frozen=True, eq=False)
class PureState:
    """Unit-norm state vector; promoted to a density matrix on demand."""

    amplitudes: np.ndarray
    dims: tuple[int, ...]

    def __init__(self, amplitudes, dims: Sequence[int]):
        dims = check_dims(dims)
        v = _frozen(np.ravel(amplitudes))
        if v.shape != (prod(dims),):
            raise DimensionError(f"vector length {v.size} does not match dims {dims}")
        norm2 = float(np.vdot(v, v).real)
        if abs(norm2 - 1.0) > 1e-10:
            raise InvalidStateError(f"squared norm {norm2:.12f} differs from 1")
        object.__setattr__(self, "amplitudes", v)
        object.__setattr__(self, "dims", dims)

    @classmethod
    def from_unnormalized(cls, amplitudes, dims: Sequence[int]) -> "PureState":
        v = np.ravel(np.asarray(amplitudes, dtype=complex))
        n = np.linalg.norm(v)
        if n == 0:
            raise InvalidStateError("zero vector cannot be normalized")
        return cls(v / n, dims)

    @classmethod
    def basis(cls, dims: Sequence[int], index: Sequence[int]) -> "PureState":
        """Product of computational basis vectors, ``index[k]`` on subsystem k."""
        dims = check_dims(dims)
        v = np.zeros(prod(dims), dtype=complex)
        v[np.ravel_multi_index(tuple(index), dims)] = 1.0
        return cls(v, dims)

    def density_matrix(self) -> DensityMatrix:
        v = self.amplitudes
        return DensityMatrix(np.outer(v, v.conj()), self.dims, check_psd=False)


State = Union[DensityMatrix, PureState]


def as_density(state: State) -> DensityMatrix:
    if isinstance(state, PureState):
        return state.density_matrix()
    if isinstance(state, DensityMatrix):
        return state
    raise InputError(f"expected a quantum state, got {type(state).__name__}")


def tensor(a: State, b: State) -> State:
    """Kronecker product; the subsystem lists are concatenated."""
    if isinstance(a, PureState) and isinstance(b, PureState):
        return PureState(np.kron(a.amplitudes, b.amplitudes), a.dims + b.dims)
    if isinstance(a, DensityMatrix) and isinstance(b, DensityMatrix):
        return DensityMatrix(np.kron(a.data, b.data), a.dims + b.dims, check_psd=False)
    raise InputError("tensor() needs two states of the same kind")


def partial_trace(rho: State, keep: Sequence[int]) -> DensityMatrix:
    """Reduced state on the subsystems listed in ``keep`` (kept in their original order)."""
    rho = as_density(rho)
    n = rho.n_subsystems
    raw = [int(k) for k in keep]
    keep = sorted(set(raw))
    if not keep or len(keep) != len(raw) or keep[0] < 0 or keep[-1] >= n:
        raise InputError(f"invalid subsystem selection {keep} for {n} subsystems")
    if len(keep) == n:
        return rho
    drop = [k for k in range(n) if k not in keep]
    dk = prod(rho.dims[k] for k in keep)
    dt = prod(rho.dims[k] for k in drop)
    t = rho.data.reshape(rho.dims + rho.dims)
    t = t.transpose(keep + drop + [n + k for k in keep] + [n + k for k in drop])
    t = t.reshape(dk, dt, dk, dt)
    red = np.einsum("ajbj->ab", t)
    return DensityMatrix(red, [rho.dims[k] for k in keep], check_psd=False)


def eig_hermitian(m, tol: float = 1e-8) -> tuple[np.ndarray, np.ndarray]:
    """Ascending real eigenvalues and unitary eigenvectors (as columns)."""
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    if np.max(np.abs(m - m.conj().T), initial=0.0) > tol:
        raise InputError("matrix is not Hermitian")
    return np.linalg.eigh(m)


def _clamped_spectrum(w: np.ndarray) -> np.ndarray:
    if w.size and w.min() < -PSD_TOL:
        raise InvalidStateError(f"eigenvalue {w.min():.3e} below -{PSD_TOL:g}")
    return np.clip(w, 0.0, None)


def _entropy_of(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def von_neumann_entropy(rho: State) -> float:
    if isinstance(rho, PureState):
        return 0.0
    w = np.linalg.eigvalsh(as_density(rho).data)
    return _entropy_of(_clamped_spectrum(w))


def shannon_entropy(p) -> float:
    p = np.asarray(p, dtype=float).ravel()
    if p.size and p.min() < -1e-12:
        raise InputError(f"negative probability {p.min():.3e}")
    p = np.clip(p, 0.0, None)
    total = p.sum()
    if abs(total - 1.0) > 1e-8:
        raise InputError(f"probabilities sum to {total:.12f}, not 1")
    return _entropy_of(p / total)


def is_unitary(u, tol: float = UNITARY_TOL) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return bool(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) <= tol)


def apply_unitary(rho: State, u) -> State:
    """``u rho u^dagger`` (or ``u |psi>`` for pure states)."""
    u = np.asarray(u, dtype=complex)
    if isinstance(rho, PureState):
        d = rho.amplitudes.size
    else:
        d = as_density(rho).dim
    if u.shape != (d, d):
        raise DimensionError(f"unitary of shape {u.shape} cannot act on dimension {d}")
    if not is_unitary(u):
        raise InputError("operator is not unitary")
    if isinstance(rho, PureState):
        return PureState(u @ rho.amplitudes, rho.dims)
    out = u @ rho.data @ u.conj().T
    return DensityMatrix((out + out.conj().T) / 2, rho.dims, check_psd=False)
