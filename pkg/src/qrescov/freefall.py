"""Two particles falling in a uniform field, seen from the laboratory (R)
and from particle A.

The centre of mass falls and spreads, the relative coordinate only
spreads; both are sampled on a ``(2L+1) x (2L+1)`` position lattice.  All
lattice quantities are in units of the spatial resolution ``delta_q``,
which follows from the time unit via ``tau = 2 m_A delta_q^2 / hbar``.

Only moduli of the wavefunction enter the quantumness, so full states are
built with real nonnegative amplitudes.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields, replace
from math import log, pi, sqrt
from typing import Iterable, Mapping

import numpy as np

from .exceptions import InputError, InvariantError, LeakageError
from .frames import BOUNDARY_MODES, LatticeGrid, position_set
from .hilbert import PureState, partial_trace, shannon_entropy
from .resources import ObservableBasis, coherence, discord_symmetric

HBAR_SI = 1.054571817e-34


@dataclass(frozen=True)
class FreefallConfig:
    half_width: int = 15
    d_bar: float = 3.0
    sigma_cm_bar: float = 7.0
    sigma_r_bar: float = 3.0
    mass_a_kg: float = 2.4e-10
    mass_b_kg: float = 2.4e-10
    tau_s: float = 1e-10
    g_m_per_s2: float = 9.81
    hbar_js: float = HBAR_SI
    boundary_mode: str = "truncate"
    t_bar_max: float = 10.0
    n_steps: int = 50
    time_grid: tuple[float, ...] | None = None
    leak_threshold: float = 0.15

    def __post_init__(self):
        if self.half_width < 1:
            raise InputError("half_width must be >= 1")
        if self.sigma_cm_bar <= 0 or self.sigma_r_bar <= 0:
            raise InputError("widths must be positive")
        if self.mass_a_kg <= 0 or self.mass_b_kg <= 0:
            raise InputError("masses must be positive")
        if self.tau_s <= 0 or self.hbar_js <= 0:
            raise InputError("tau and hbar must be positive")
        L = self.half_width
        if max(self.sigma_cm_bar, self.sigma_r_bar, abs(self.d_bar)) >= L:
            raise InputError("widths and separation must lie inside the grid (< half_width)")
        if self.boundary_mode not in BOUNDARY_MODES:
            raise InputError(f"boundary_mode must be one of {BOUNDARY_MODES}")
        if self.time_grid is None and (self.n_steps < 1 or self.t_bar_max < 0):
            raise InputError("need n_steps >= 1 and t_bar_max >= 0")
        if self.time_grid is not None:
            object.__setattr__(self, "time_grid", tuple(float(t) for t in self.time_grid))
            if any(t < 0 for t in self.time_grid):
                raise InputError("times must be nonnegative")
        if not 0 <= self.leak_threshold <= 1:
            raise InputError("leak_threshold must lie in [0, 1]")

    @property
    def xi(self) -> int:
        return 2 * self.half_width + 1

    @property
    def total_mass(self) -> float:
        return self.mass_a_kg + self.mass_b_kg

    @property
    def reduced_mass(self) -> float:
        return self.mass_a_kg * self.mass_b_kg / self.total_mass

    @property
    def eta(self) -> float:
        return self.mass_b_kg / self.mass_a_kg

    @property
    def delta_q(self) -> float:
        return sqrt(self.tau_s * self.hbar_js / (2 * self.mass_a_kg))

    @property
    def grid(self) -> LatticeGrid:
        return LatticeGrid(self.half_width, self.delta_q, hbar=self.hbar_js)

    @property
    def t_cm(self) -> float:
        return 2 * self.total_mass * (self.sigma_cm_bar * self.delta_q) ** 2 / self.hbar_js

    @property
    def t_r(self) -> float:
        return 2 * self.reduced_mass * (self.sigma_r_bar * self.delta_q) ** 2 / self.hbar_js

    def times(self) -> np.ndarray:
        if self.time_grid is not None:
            return np.array(self.time_grid, dtype=float)
        if self.n_steps == 1:
            return np.array([0.0])
        return np.linspace(0.0, self.t_bar_max, self.n_steps)

    def to_mapping(self) -> dict:
        return asdict(self)

    @classmethod
    def from_mapping(cls, values: Mapping[str, object]) -> "FreefallConfig":
        """Build from string or typed values; unknown keys are an error."""
        known = {f.name: f for f in fields(cls)}
        kwargs = {}
        for key, raw in values.items():
            if key not in known:
                raise InputError(f"unknown config key {key!r}")
            kwargs[key] = _coerce(key, raw)
        return cls(**kwargs)


def _coerce(key: str, raw):
    if key in ("half_width", "n_steps"):
        v = float(raw)
        if v != int(v):
            raise InputError(f"{key} must be an integer")
        return int(v)
    if key == "boundary_mode":
        return str(raw).strip()
    if key == "time_grid":
        if raw is None:
            return None
        if isinstance(raw, str):
            items = [s for s in raw.replace(",", " ").split() if s]
        else:
            items = list(raw)
        try:
            return tuple(float(t) for t in items)
        except ValueError as exc:
            raise InputError(f"bad time_grid entry: {exc}") from None
    try:
        return float(raw)
    except (TypeError, ValueError):
        raise InputError(f"{key} must be a number, got {raw!r}") from None


def eta_limit_config(eta: float = 1e-3, **overrides) -> FreefallConfig:
    """Small-grid surrogate for ``m_B/m_A -> 0`` used by the discord check."""
    base = dict(half_width=7, d_bar=2.0, sigma_cm_bar=4.0, sigma_r_bar=1.0, time_grid=(0.0,), leak_threshold=0.25)
    base.update(overrides)
    cfg = FreefallConfig(**base)
    return replace(cfg, mass_b_kg=cfg.mass_a_kg * eta)


def sharp_relative_config(sigma_r_bar: float = 0.05, **overrides) -> FreefallConfig:
    """Small-grid surrogate for ``sigma_r -> 0`` used by the coherence check."""
    base = dict(half_width=7, d_bar=2.0, sigma_cm_bar=4.0, sigma_r_bar=sigma_r_bar, time_grid=(0.0,), leak_threshold=0.25)
    base.update(overrides)
    return FreefallConfig(**base)


def spread_width(sigma_bar: float, t: float, t_s: float) -> float:
    """Free-spreading width ``sigma (1 + t^2/t_s^2)^(1/2)``."""
    if sigma_bar <= 0 or t_s <= 0:
        raise InputError("sigma and t_s must be positive")
    return sigma_bar * sqrt(1.0 + (t / t_s) ** 2)


def gaussian_density(x, sigma: float):
    return np.exp(-np.square(x) / (2 * sigma**2)) / sqrt(2 * pi * sigma**2)


def _sampled(cfg: FreefallConfig, t_bar: float, primed: bool) -> np.ndarray:
    t = t_bar * cfg.tau_s
    s_cm = spread_width(cfg.sigma_cm_bar, t, cfg.t_cm)
    s_r = spread_width(cfg.sigma_r_bar, t, cfg.t_r)
    chi = cfg.g_m_per_s2 * t**2 / (2 * cfg.delta_q)
    sites = np.arange(-cfg.half_width, cfg.half_width + 1)
    i, j = np.meshgrid(sites, sites, indexing="ij")
    if primed:
        i, j = -i, j - i
    m_a, m_b = cfg.mass_a_kg, cfg.mass_b_kg
    r = (m_a * i + m_b * j) / cfg.total_mass
    s = j - i
    return gaussian_density(r - chi, s_cm) * gaussian_density(s - cfg.d_bar, s_r)


def _normalize(raw: np.ndarray, threshold: float) -> tuple[np.ndarray, float]:
    kept = float(raw.sum())
    leaked = max(0.0, 1.0 - kept)
    if leaked > threshold:
        raise LeakageError(f"leaked mass {leaked:.4f} exceeds threshold {threshold:g}")
    return raw / kept, leaked


def lab_frame_probs(cfg: FreefallConfig, t_bar: float) -> tuple[np.ndarray, float]:
    """Position distribution ``p_ij`` in R's frame, renormalized over the grid.

    Returns ``(probs, leaked_mass)``; rows index particle A, columns B.
    """
    return _normalize(_sampled(cfg, t_bar, primed=False), cfg.leak_threshold)


def particle_frame_probs(cfg: FreefallConfig, t_bar: float) -> tuple[np.ndarray, float]:
    """Distribution ``p'_ij`` in A's frame (rows: R relative to A, columns: B relative to A).

    Truncate mode samples the transformed Gaussian directly on the grid.
    Wrap mode applies the cyclic index map ``(i, j) -> (-i, j - i)`` to the
    renormalized lab distribution, which is a permutation.
    """
    if cfg.boundary_mode == "truncate":
        return _normalize(_sampled(cfg, t_bar, primed=True), cfg.leak_threshold)
    lab, leaked = lab_frame_probs(cfg, t_bar)
    L, xi = cfg.half_width, cfg.xi
    sites = np.arange(-L, L + 1)
    i, j = np.meshgrid(sites, sites, indexing="ij")
    return lab[(-i + L) % xi, (j - i + L) % xi], leaked


def quantumness_from_probs(probs) -> tuple[float, float]:
    """``(Q, Qbar)`` of a pure state whose position-dephased diagonal is ``probs``.

    For pure states ``I = ln d`` and the jointly dephased state is
    ``diag(probs)``, so ``Q = H(probs)`` and ``Qbar = ln d - H(probs)``.
    """
    p = np.asarray(probs, dtype=float)
    q = shannon_entropy(p)
    return q, log(p.size) - q


@dataclass(frozen=True, eq=False)
class FrameSnapshot:
    t_bar: float
    probs_R: np.ndarray
    probs_A: np.ndarray
    Q_R: float
    Qbar_R: float
    Q_A: float
    Qbar_A: float
    info: float
    delta_percent: float
    leaked_mass_R: float
    leaked_mass_A: float

    CSV_COLUMNS = (
        "t_bar", "Q_R", "Qbar_R", "Q_A", "Qbar_A", "info", "delta_percent", "leaked_mass_R", "leaked_mass_A",
    )

    def row(self) -> tuple[float, ...]:
        return tuple(float(getattr(self, c)) for c in self.CSV_COLUMNS)


def snapshot(cfg: FreefallConfig, t_bar: float) -> FrameSnapshot:
    p, leak_r = lab_frame_probs(cfg, t_bar)
    p_a, leak_a = particle_frame_probs(cfg, t_bar)
    q_r, qbar_r = quantumness_from_probs(p)
    q_a, qbar_a = quantumness_from_probs(p_a)
    info = 2 * log(cfg.xi)
    for frame, q, qbar in (("R", q_r, qbar_r), ("A", q_a, qbar_a)):
        if abs(q + qbar - info) > 1e-8:
            raise InvariantError(f"frame {frame} at t={t_bar}: Q + Qbar = {q + qbar} != {info}")
    return FrameSnapshot(
        t_bar=float(t_bar),
        probs_R=p,
        probs_A=p_a,
        Q_R=q_r,
        Qbar_R=qbar_r,
        Q_A=q_a,
        Qbar_A=qbar_a,
        info=info,
        delta_percent=100.0 * (q_r - q_a) / info,
        leaked_mass_R=leak_r,
        leaked_mass_A=leak_a,
    )


def run_simulation(cfg: FreefallConfig, max_workers: int | None = None) -> list[FrameSnapshot]:
    """Percentage quantumness gap between the two frames over ``cfg.times()``.

    Steps are independent; with ``max_workers > 1`` they run in threads,
    and results keep the order of the time grid.
    """
    times: Iterable[float] = cfg.times()
    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers) as pool:
            return list(pool.map(lambda t: snapshot(cfg, t), times))
    return [snapshot(cfg, t) for t in times]


def full_state(cfg: FreefallConfig, t_bar: float, frame: str = "R") -> PureState:
    """``xi^2``-dimensional pure state with amplitudes ``sqrt(p_ij)``."""
    if frame == "R":
        p, _ = lab_frame_probs(cfg, t_bar)
    elif frame == "A":
        p, _ = particle_frame_probs(cfg, t_bar)
    else:
        raise InputError("frame must be 'R' or 'A'")
    return PureState.from_unnormalized(np.sqrt(p).ravel(), (cfg.xi, cfg.xi))


@dataclass(frozen=True)
class NonInvarianceReport:
    t_bar: float
    discord_R: float
    discord_A: float
    coherence_R: float
    coherence_A: float


def coherence_discord_noninvariance(cfg: FreefallConfig, t_bar: float) -> NonInvarianceReport:
    """Position-basis symmetric discord and A-coherence in both frames."""
    xset = position_set((cfg.xi, cfg.xi))
    xa = ObservableBasis.computational(0, cfg.xi)
    out = {}
    for frame in ("R", "A"):
        rho = full_state(cfg, t_bar, frame).density_matrix()
        out[f"discord_{frame}"] = discord_symmetric(rho, xset)
        out[f"coherence_{frame}"] = coherence(partial_trace(rho, [0]), xa)
    return NonInvarianceReport(t_bar=float(t_bar), **out)
