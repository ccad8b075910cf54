"""Dephasing maps, coherence/discord/quantumness quantifiers, context
incompatibility, irreality and the information decomposition.

Observables enter only through their eigenbases: every quantifier depends
on the rank-1 projector family, never on the eigenvalues.  Where two
equivalent formulas exist, both are evaluated and required to agree to
``IDENTITY_TOL``; a mismatch raises :class:`InvariantError`.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from math import log, prod
from typing import Sequence, Union

import numpy as np

from .exceptions import DimensionError, InputError, InvariantError, NotUnbiasedError
from .hilbert import (
    DensityMatrix,
    State,
    apply_unitary,
    as_density,
    is_unitary,
    partial_trace,
    von_neumann_entropy,
)

IDENTITY_TOL = 1e-9
NEGATIVE_TOL = 1e-9
GRAM_TOL = 1e-10
UNBIASED_TOL = 1e-9


def _nonneg(x: float, what: str) -> float:
    if x < -NEGATIVE_TOL:
        raise InvariantError(f"{what} = {x:.3e} is negative beyond float noise")
    return max(float(x), 0.0)


def _agree(a: float, b: float, what: str, tol: float = IDENTITY_TOL) -> None:
    if abs(a - b) > tol:
        raise InvariantError(f"{what}: {a!r} vs {b!r} (gap {abs(a - b):.3e} > {tol:g})")


@dataclass(frozen=True, eq=False)
class ObservableBasis:
    """Orthonormal eigenbasis (columns of ``vectors``) of a nondegenerate
    observable acting on subsystem ``subsystem``."""

    subsystem: int
    vectors: np.ndarray

    def __init__(self, subsystem: int, vectors):
        v = np.array(vectors, dtype=complex, copy=True)
        if v.ndim != 2 or v.shape[0] != v.shape[1] or v.shape[0] < 2:
            raise DimensionError(f"basis must be a square matrix of side >= 2, got {v.shape}")
        if np.max(np.abs(v.conj().T @ v - np.eye(v.shape[0]))) > GRAM_TOL:
            raise InputError("basis vectors are not orthonormal")
        if subsystem < 0:
            raise InputError("subsystem index must be nonnegative")
        v.setflags(write=False)
        object.__setattr__(self, "subsystem", int(subsystem))
        object.__setattr__(self, "vectors", v)

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    @classmethod
    def computational(cls, subsystem: int, d: int) -> "ObservableBasis":
        return cls(subsystem, np.eye(d))

    def on(self, subsystem: int) -> "ObservableBasis":
        return ObservableBasis(subsystem, self.vectors)

    def measurement(self, dims: Sequence[int]) -> "ProjectiveMeasurement":
        """Lift to ``A_i (x) 1`` projectors on the full space."""
        dims = tuple(dims)
        k = self.subsystem
        if k >= len(dims) or dims[k] != self.dim:
            raise DimensionError(f"basis of dim {self.dim} on subsystem {k} does not fit dims {dims}")
        frame = np.eye(1)
        for j, d in enumerate(dims):
            frame = np.kron(frame, self.vectors if j == k else np.eye(d))
        labels = np.unravel_index(np.arange(prod(dims)), dims)[k]
        return ProjectiveMeasurement(frame, labels)


@dataclass(frozen=True, eq=False)
class ObservableSet:
    """One basis per subsystem, ordered by subsystem index."""

    bases: tuple[ObservableBasis, ...]

    def __init__(self, bases: Sequence[ObservableBasis]):
        bases = tuple(sorted(bases, key=lambda b: b.subsystem))
        idx = [b.subsystem for b in bases]
        if idx != list(range(len(bases))):
            raise InputError(f"need exactly one basis per subsystem, got subsystems {idx}")
        object.__setattr__(self, "bases", bases)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(b.dim for b in self.bases)

    def __getitem__(self, k: int) -> ObservableBasis:
        return self.bases[k]

    def __len__(self) -> int:
        return len(self.bases)

    @classmethod
    def computational(cls, dims: Sequence[int]) -> "ObservableSet":
        return cls([ObservableBasis.computational(k, d) for k, d in enumerate(dims)])

    def measurement(self, dims: Sequence[int] | None = None) -> "ProjectiveMeasurement":
        """Joint local measurement: all outcomes distinct, so the map is the
        full dephasing in the product eigenbasis."""
        dims = self.dims if dims is None else tuple(dims)
        if dims != self.dims:
            raise DimensionError(f"observable set dims {self.dims} do not match {dims}")
        frame = np.eye(1)
        for b in self.bases:
            frame = np.kron(frame, b.vectors)
        return ProjectiveMeasurement(frame, np.arange(prod(dims)))


@dataclass(frozen=True, eq=False)
class ProjectiveMeasurement:
    """Projective measurement on the full space, possibly nonlocal.

    ``frame`` is a unitary whose columns are eigenvectors; columns sharing a
    label span the same projector.  Passive-picture observables
    ``T^dagger O T`` are generally nonlocal and are represented this way.
    """

    frame: np.ndarray
    labels: np.ndarray

    def __init__(self, frame, labels):
        w = np.array(frame, dtype=complex, copy=True)
        lab = np.array(labels, copy=True).ravel()
        if w.ndim != 2 or w.shape[0] != w.shape[1] or lab.size != w.shape[0]:
            raise DimensionError("frame must be square with one label per column")
        if not is_unitary(w, 1e-9):
            raise InputError("measurement frame is not unitary")
        w.setflags(write=False)
        lab.setflags(write=False)
        object.__setattr__(self, "frame", w)
        object.__setattr__(self, "labels", lab)

    @property
    def dim(self) -> int:
        return self.frame.shape[0]

    def conjugated(self, t) -> "ProjectiveMeasurement":
        """Eigenvectors ``|a> -> T^dagger |a>``, i.e. projectors ``T^dagger P T``."""
        t = np.asarray(getattr(t, "matrix", t), dtype=complex)
        return ProjectiveMeasurement(t.conj().T @ self.frame, self.labels)

    def dephase(self, rho: State) -> DensityMatrix:
        rho = as_density(rho)
        if rho.dim != self.dim:
            raise DimensionError(f"measurement of dim {self.dim} cannot act on dim {rho.dim}")
        w = self.frame
        r = w.conj().T @ rho.data @ w
        r = np.where(self.labels[:, None] == self.labels[None, :], r, 0.0)
        out = w @ r @ w.conj().T
        return DensityMatrix((out + out.conj().T) / 2, rho.dims, check_psd=False)


@dataclass(frozen=True, eq=False)
class Context:
    """A state and two ordered observable sets (local or passive-picture)."""

    state: DensityMatrix
    set1: Union[ObservableSet, ProjectiveMeasurement]
    set2: Union[ObservableSet, ProjectiveMeasurement]


@dataclass(frozen=True)
class ResourceReport:
    """Full decomposition for one context, all values in nats."""

    info: float
    coherence_A: float
    coherence_B: float
    discord_A: float
    discord_B_after_A: float
    discord_sym: float
    quantumness: float
    incompatible_quantumness: float
    context_incompatibility: float
    irreality_A: float
    irreality_B_after_A: float

    def to_dict(self) -> dict[str, float]:
        return asdict(self)


# --------------------------------------------------------------------- maps


def _local_dephase(rho: DensityMatrix, basis: ObservableBasis) -> DensityMatrix:
    dims = rho.dims
    k = basis.subsystem
    if k >= len(dims) or dims[k] != basis.dim:
        raise DimensionError(f"basis of dim {basis.dim} on subsystem {k} does not fit dims {dims}")
    pre, dk, post = prod(dims[:k]), dims[k], prod(dims[k + 1:])
    v = basis.vectors
    t = rho.data.reshape(pre, dk, post, pre, dk, post)
    diag = np.einsum("ia,pibqjr,ja->pabqr", v.conj(), t, v, optimize=True)
    out = np.einsum("ia,pabqr,ja->pibqjr", v, diag, v.conj(), optimize=True)
    out = out.reshape(rho.dim, rho.dim)
    return DensityMatrix((out + out.conj().T) / 2, dims, check_psd=False)


def dephase(rho: State, basis: ObservableBasis) -> DensityMatrix:
    """Unrevealed measurement of one local observable:
    ``sum_i (A_i (x) 1) rho (A_i (x) 1)``."""
    return _local_dephase(as_density(rho), basis)


def dephase_joint(rho: State, obs: ObservableSet) -> DensityMatrix:
    rho = as_density(rho)
    if obs.dims != rho.dims:
        raise DimensionError(f"observable set dims {obs.dims} do not match state dims {rho.dims}")
    for b in obs.bases:
        rho = _local_dephase(rho, b)
    return rho


def _as_measurement(obs, dims) -> ProjectiveMeasurement:
    if isinstance(obs, ProjectiveMeasurement):
        return obs
    if isinstance(obs, (ObservableSet, ObservableBasis)):
        return obs.measurement(dims)
    raise InputError(f"cannot interpret {type(obs).__name__} as a measurement")


def _dephase_any(rho: DensityMatrix, obs) -> DensityMatrix:
    if isinstance(obs, ObservableSet):
        return dephase_joint(rho, obs)
    if isinstance(obs, ObservableBasis):
        return dephase(rho, obs)
    return _as_measurement(obs, rho.dims).dephase(rho)


# -------------------------------------------------------------- quantifiers


def information(rho: State) -> float:
    rho = as_density(rho)
    return _nonneg(log(rho.dim) - von_neumann_entropy(rho), "information")


def coherence(rho_sub: State, basis: ObservableBasis) -> float:
    """Entropy gain of a single-subsystem state under dephasing in ``basis``.

    The basis' subsystem label is ignored: it is applied to the only factor.
    """
    rho_sub = as_density(rho_sub)
    if rho_sub.n_subsystems != 1:
        raise DimensionError("coherence() expects a single-subsystem state")
    deph = _local_dephase(rho_sub, basis.on(0))
    return _nonneg(von_neumann_entropy(deph) - von_neumann_entropy(rho_sub), "coherence")


def _require_bipartite(rho: DensityMatrix) -> None:
    if rho.n_subsystems != 2:
        raise DimensionError(f"expected a bipartite state, got {rho.n_subsystems} subsystems")


def mutual_information(rho: State) -> float:
    rho = as_density(rho)
    _require_bipartite(rho)
    s_a = von_neumann_entropy(partial_trace(rho, [0]))
    s_b = von_neumann_entropy(partial_trace(rho, [1]))
    return _nonneg(s_a + s_b - von_neumann_entropy(rho), "mutual information")


def _discord_raw(rho: DensityMatrix, basis: ObservableBasis) -> float:
    return mutual_information(rho) - mutual_information(dephase(rho, basis))


def discord_oneway(rho: State, basis: ObservableBasis) -> float:
    rho = as_density(rho)
    _require_bipartite(rho)
    return _nonneg(_discord_raw(rho, basis), "one-way discord")


def discord_symmetric(rho: State, obs: ObservableSet) -> float:
    """Mutual-information loss under the joint local dephasing; checked
    against the chain ``D_A(rho) + D_B(Phi_A(rho))``."""
    rho = as_density(rho)
    _require_bipartite(rho)
    d_ab = mutual_information(rho) - mutual_information(dephase_joint(rho, obs))
    chain = _discord_raw(rho, obs[0]) + _discord_raw(dephase(rho, obs[0]), obs[1])
    _agree(d_ab, chain, "symmetric discord chain rule")
    return _nonneg(d_ab, "symmetric discord")


def measured_quantumness(rho: State, obs) -> float:
    """Information removed by the joint dephasing: ``I(rho) - I(Phi_O(rho))``.

    Works for nonlocal (passive-picture) measurements too.
    """
    rho = as_density(rho)
    deph = _dephase_any(rho, obs)
    return _nonneg(von_neumann_entropy(deph) - von_neumann_entropy(rho), "quantumness")


def quantumness(rho: State, obs: ObservableSet) -> float:
    """Total coherence plus symmetric discord with respect to ``obs``."""
    rho = as_density(rho)
    _require_bipartite(rho)
    if obs.dims != rho.dims:
        raise DimensionError(f"observable set dims {obs.dims} do not match state dims {rho.dims}")
    parts = (
        coherence(partial_trace(rho, [0]), obs[0])
        + coherence(partial_trace(rho, [1]), obs[1])
        + discord_symmetric(rho, obs)
    )
    _agree(parts, measured_quantumness(rho, obs), "quantumness: C_A + C_B + D_AB vs I - I(Phi)")
    return parts


def context_incompatibility_single(rho_sub: State, basis1: ObservableBasis, basis2: ObservableBasis) -> float:
    rho_sub = as_density(rho_sub)
    if rho_sub.n_subsystems != 1:
        raise DimensionError("expected a single-subsystem state")
    first = _local_dephase(rho_sub, basis1.on(0))
    second = _local_dephase(first, basis2.on(0))
    return _nonneg(information(first) - information(second), "context incompatibility")


def context_incompatibility(ctx: Context) -> float:
    first = _dephase_any(ctx.state, ctx.set1)
    second = _dephase_any(first, ctx.set2)
    return _nonneg(information(first) - information(second), "context incompatibility")


def check_unbiased(obs: ObservableSet, mu: ObservableSet, tol: float = UNBIASED_TOL) -> None:
    """Raise NotUnbiasedError unless every ``|<a_i|abar_j>|^2 = 1/d_k``."""
    if obs.dims != mu.dims:
        raise NotUnbiasedError(f"sets live on different dims {obs.dims} vs {mu.dims}")
    for b, m in zip(obs.bases, mu.bases):
        overlaps = np.abs(b.vectors.conj().T @ m.vectors) ** 2
        dev = float(np.max(np.abs(overlaps - 1.0 / b.dim)))
        if dev > tol:
            raise NotUnbiasedError(
                f"subsystem {b.subsystem}: squared overlaps deviate from 1/{b.dim} by {dev:.3e}"
            )


def incompatible_quantumness(rho: State, obs: ObservableSet, mu: ObservableSet) -> float:
    """Quantumness of the ``obs``-dephased state relative to the unbiased set
    ``mu``; equal to the context incompatibility of ``{rho, obs, mu}``."""
    rho = as_density(rho)
    check_unbiased(obs, mu)
    via_quantumness = quantumness(dephase_joint(rho, obs), mu)
    via_context = context_incompatibility(Context(rho, obs, mu))
    _agree(via_quantumness, via_context, "incompatible quantumness vs context incompatibility")
    return via_quantumness


def measured_incompatible_quantumness(rho: State, obs, mu) -> float:
    """Incompatible quantumness for arbitrary (e.g. passive-picture) measurements.

    Unbiasedness is not rechecked here: conjugating an unbiased pair by the
    same unitary keeps it unbiased.
    """
    rho = as_density(rho)
    via_quantumness = measured_quantumness(_dephase_any(rho, obs), mu)
    via_context = context_incompatibility(Context(rho, obs, mu))
    _agree(via_quantumness, via_context, "incompatible quantumness vs context incompatibility")
    return via_quantumness


def irreality(rho: State, basis: ObservableBasis) -> float:
    """Entropy gap between ``rho`` and its ``basis``-dephased version; zero
    exactly on reality states.  For bipartite input it is cross-checked
    against coherence plus one-way discord."""
    rho = as_density(rho)
    value = von_neumann_entropy(dephase(rho, basis)) - von_neumann_entropy(rho)
    if rho.n_subsystems == 2:
        reduced = partial_trace(rho, [basis.subsystem])
        split = coherence(reduced, basis) + _discord_raw(rho, basis)
        _agree(value, split, "irreality vs coherence + discord")
    return _nonneg(value, "irreality")


def decompose(rho: State, obs: ObservableSet, mu: ObservableSet) -> ResourceReport:
    """Information = quantumness + incompatible quantumness, with every
    intermediate identity of the stepwise erasure checked."""
    rho = as_density(rho)
    _require_bipartite(rho)
    check_unbiased(obs, mu)
    a, b = obs[0], obs[1]
    info = information(rho)
    rho_a, rho_b = partial_trace(rho, [0]), partial_trace(rho, [1])
    after_a = dephase(rho, a)
    after_ba = dephase(after_a, b)

    c_a = coherence(rho_a, a)
    c_b = coherence(rho_b, b)
    d_a = _discord_raw(rho, a)
    d_b_after = _discord_raw(after_a, b)
    d_ab = discord_symmetric(rho, obs)

    # measuring A removes exactly A-coherence and A-discord
    _agree(information(after_a) - info, -(c_a + d_a), "A-measurement information loss")
    _agree(
        information(after_ba) - information(after_a),
        -(coherence(partial_trace(after_a, [1]), b) + d_b_after),
        "B-measurement information loss",
    )
    _agree(d_a + d_b_after, d_ab, "discord chain rule")

    q = quantumness(rho, obs)
    ctx = context_incompatibility(Context(rho, obs, mu))
    qbar = incompatible_quantumness(rho, obs, mu)
    irr_a = irreality(rho, a)
    irr_b = irreality(after_a, b)
    _agree(q, irr_a + irr_b, "quantumness vs irreality split")
    _agree(info, q + qbar, "information decomposition")

    return ResourceReport(
        info=info,
        coherence_A=c_a,
        coherence_B=c_b,
        discord_A=_nonneg(d_a, "A-discord"),
        discord_B_after_A=_nonneg(d_b_after, "B-discord after A"),
        discord_sym=d_ab,
        quantumness=q,
        incompatible_quantumness=qbar,
        context_incompatibility=ctx,
        irreality_A=irr_a,
        irreality_B_after_A=irr_b,
    )


@dataclass(frozen=True)
class CovarianceResult:
    lhs: float
    rhs: float
    gap: float
    rhs_passive: float
    quantumness_before: float
    quantumness_after: float


def covariance_check(
    rho: State,
    obs: ObservableSet,
    mu: ObservableSet,
    t,
    obs_primed: ObservableSet,
    mu_primed: ObservableSet,
) -> CovarianceResult:
    """Compare ``Q + Qbar`` before and after the frame change ``t``.

    The primed side is evaluated in the active picture (transformed state,
    primed sets) and in the passive picture (original state, sets
    conjugated by ``t``); the two must agree.
    """
    rho = as_density(rho)
    t = np.asarray(getattr(t, "matrix", t), dtype=complex)
    check_unbiased(obs, mu)
    check_unbiased(obs_primed, mu_primed)
    if prod(obs_primed.dims) != rho.dim:
        raise DimensionError("primed observable sets do not match the state dimension")

    q_before = quantumness(rho, obs)
    lhs = q_before + incompatible_quantumness(rho, obs, mu)

    rotated = apply_unitary(rho, t)
    rho_primed = DensityMatrix(rotated.data, obs_primed.dims, check_psd=False)
    q_after = quantumness(rho_primed, obs_primed)
    rhs = q_after + incompatible_quantumness(rho_primed, obs_primed, mu_primed)

    m_passive = obs_primed.measurement().conjugated(t)
    mu_passive = mu_primed.measurement().conjugated(t)
    rhs_pp = measured_quantumness(rho, m_passive) + measured_incompatible_quantumness(
        rho, m_passive, mu_passive
    )
    _agree(rhs, rhs_pp, "active vs passive picture")
    return CovarianceResult(lhs, rhs, abs(lhs - rhs), rhs_pp, q_before, q_after)
