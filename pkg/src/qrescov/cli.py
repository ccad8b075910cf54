"""Command-line entry point.

Exit codes: 0 success, 1 invariant violation, 2 input error.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import sys
import time
from dataclasses import dataclass, fields
from math import prod
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .exceptions import InputError, InvariantError, LeakageError, QRescovError
from .frames import (
    LatticeGrid,
    fourier_matrix,
    mu_partner,
    mu_partner_set,
    parity_conditional_shift,
)
from .freefall import FreefallConfig, coherence_discord_noninvariance, run_simulation
from .gaussian import (
    OMEGA,
    apply_symplectic,
    crossing_term_params,
    identity_transform,
    product_gaussian,
    residual_entanglement,
    symplectic_for_momentum_swap,
    symplectic_for_position_swap,
)
from .hilbert import DensityMatrix, as_density, partial_trace
from .resources import (
    IDENTITY_TOL,
    ObservableBasis,
    ObservableSet,
    coherence,
    covariance_check,
    decompose,
    discord_oneway,
    incompatible_quantumness,
    irreality,
    quantumness,
)
from .scenarios import (
    SCENARIOS,
    TwoSlitConfig,
    named_state,
    random_state,
    random_unitary,
    two_slit_state,
    two_slit_transformed,
)

EXIT_OK, EXIT_INVARIANT, EXIT_INPUT = 0, 1, 2


# ------------------------------------------------------------------ file io


def read_state_file(path: str | Path) -> DensityMatrix:
    """Plain-text density matrix: ``dims: d_A d_B`` header, then one row per
    line with whitespace-separated ``re+imj`` entries."""
    lines = [ln.strip() for ln in Path(path).read_text().splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines or not lines[0].lower().startswith("dims:"):
        raise InputError("state file must start with a 'dims: d_A d_B' header")
    try:
        dims = [int(x) for x in lines[0].split(":", 1)[1].split()]
        rows = [[complex(x) for x in ln.split()] for ln in lines[1:]]
    except ValueError as exc:
        raise InputError(f"malformed state file: {exc}") from None
    d = prod(dims)
    if len(rows) != d or any(len(r) != d for r in rows):
        raise InputError(f"expected a {d}x{d} matrix for dims {dims}")
    return DensityMatrix(np.array(rows), dims)


def write_state_file(rho: DensityMatrix, path: str | Path) -> None:
    out = ["dims: " + " ".join(str(d) for d in rho.dims)]
    for row in rho.data:
        out.append(" ".join(f"{z.real:.17g}{z.imag:+.17g}j" for z in row))
    Path(path).write_text("\n".join(out) + "\n")


def read_config_file(path: str | Path) -> dict[str, str]:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        parser.read_string("[config]\n" + Path(path).read_text())
    except configparser.Error as exc:
        raise InputError(f"cannot parse config {path}: {exc}") from None
    return dict(parser["config"])


@dataclass
class RunManifest:
    command: str
    config: dict
    seed: int | None
    boundary_mode: str | None
    version: str = __version__
    duration_s: float = 0.0

    def write_beside(self, output: Path) -> Path:
        path = output.with_name(output.name + ".manifest.json")
        path.write_text(json.dumps(self.__dict__, indent=2, default=_jsonable) + "\n")
        return path


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, tuple):
        return list(x)
    raise TypeError(f"not serializable: {type(x).__name__}")


def _emit_json(obj: dict, output: str | None) -> str:
    text = json.dumps(obj, indent=2, default=_jsonable) + "\n"
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)
    return text


# ------------------------------------------------------------ basis specs


def parse_basis_spec(spec: str, dims: Sequence[int]) -> ObservableSet:
    """One letter per subsystem: ``Z`` computational, ``X`` discrete Fourier."""
    spec = spec.strip().upper()
    if len(spec) != len(dims):
        raise InputError(f"basis spec {spec!r} needs one letter per subsystem ({len(dims)})")
    bases = []
    for k, (letter, d) in enumerate(zip(spec, dims)):
        if letter == "Z":
            bases.append(ObservableBasis.computational(k, d))
        elif letter == "X":
            bases.append(ObservableBasis(k, fourier_matrix(d)))
        else:
            raise InputError(f"unknown basis letter {letter!r} (use Z or X)")
    return ObservableSet(bases)


def _random_mu_variant(obs: ObservableSet, rng: np.random.Generator) -> ObservableSet:
    """Another unbiased partner: Fourier partner with random phases and ordering."""
    out = []
    for b in obs.bases:
        v = mu_partner(b).vectors
        phases = np.exp(2j * np.pi * rng.random(b.dim))
        out.append(ObservableBasis(b.subsystem, (v * phases)[:, rng.permutation(b.dim)]))
    return ObservableSet(out)


# --------------------------------------------------------------- commands


def cmd_decompose(args) -> int:
    if bool(args.state) == bool(args.scenario):
        raise InputError("give exactly one of --state or --scenario")
    rho = read_state_file(args.state) if args.state else as_density(named_state(args.scenario))
    if rho.n_subsystems != 2:
        raise InputError("decompose needs a bipartite state")
    obs = parse_basis_spec(args.basis or "Z" * 2, rho.dims)
    mu = parse_basis_spec(args.mu, rho.dims) if args.mu else mu_partner_set(obs)
    t0 = time.perf_counter()
    report = decompose(rho, obs, mu)
    if abs(report.info - report.quantumness - report.incompatible_quantumness) > IDENTITY_TOL:
        raise InvariantError("decomposition identity failed before writing")
    out = report.to_dict()
    if args.mu_variants:
        rng = np.random.default_rng(args.seed)
        values = [incompatible_quantumness(rho, obs, _random_mu_variant(obs, rng)) for _ in range(args.mu_variants)]
        out["mu_variants"] = args.mu_variants
        out["incompatible_quantumness_spread"] = float(max(values) - min(values))
    _emit_json(out, args.output)
    if args.output:
        RunManifest(
            "decompose",
            {"state": args.state, "scenario": args.scenario, "basis": args.basis, "mu": args.mu},
            args.seed,
            None,
            duration_s=time.perf_counter() - t0,
        ).write_beside(Path(args.output))
    return EXIT_OK


@dataclass
class CovarianceSummary:
    transform: str
    trials: int
    max_gap: float
    moved_fraction: float
    max_picture_gap: float


def run_covariance_trials(
    trials: int,
    dims: Sequence[int] = (2, 2),
    transform: str = "random-unitary",
    half_width: int = 3,
    seed: int = 0,
    move_tol: float = 1e-3,
) -> tuple[CovarianceSummary, list]:
    """Fuzz the covariance identity.

    ``random-unitary``: random state on ``dims`` (pure on even trials, mixed
    on odd), computational set with its Fourier partner, Haar-random global
    unitary.  ``lattice-swap``: random state on two ``2L+1`` site particles,
    Haar-random local bases with their Fourier partners, wrap-mode lattice
    transform.  ``identity``: as random-unitary with ``T = 1``.
    """
    rng = np.random.default_rng(seed)
    results = []
    if transform == "lattice-swap":
        grid = LatticeGrid(half_width)
        dims = (grid.xi, grid.xi)
        t_fixed = parity_conditional_shift(grid, 1, "wrap").matrix
    elif transform in ("random-unitary", "identity"):
        dims = tuple(dims)
        t_fixed = np.eye(prod(dims)) if transform == "identity" else None
    else:
        raise InputError(f"unknown transform {transform!r}")
    d = prod(dims)
    for n in range(trials):
        trial_seed = int(rng.integers(2**63))
        rank = 1 if n % 2 == 0 else int(np.random.default_rng(trial_seed).integers(2, d + 1))
        rho = random_state(dims, rank, seed=trial_seed)
        if transform == "lattice-swap":
            obs = ObservableSet(
                [ObservableBasis(k, random_unitary(dk, seed=trial_seed + 1 + k)) for k, dk in enumerate(dims)]
            )
        else:
            obs = ObservableSet.computational(dims)
        mu = mu_partner_set(obs)
        t = t_fixed if t_fixed is not None else random_unitary(d, seed=trial_seed + 7)
        results.append(covariance_check(rho, obs, mu, t, obs, mu))
    moved = sum(abs(r.quantumness_before - r.quantumness_after) > move_tol for r in results)
    summary = CovarianceSummary(
        transform=transform,
        trials=trials,
        max_gap=max((r.gap for r in results), default=0.0),
        moved_fraction=moved / trials if trials else 0.0,
        max_picture_gap=max((abs(r.rhs - r.rhs_passive) for r in results), default=0.0),
    )
    return summary, results


def cmd_covariance_check(args) -> int:
    if args.boundary != "wrap":
        raise InputError("covariance needs a unitary transform; only --boundary wrap is allowed")
    dims = [int(x) for x in args.dims.replace("x", ",").split(",")]
    if len(dims) != 2 or any(d < 2 or d > 8 for d in dims):
        raise InputError("--dims must be two integers in [2, 8], e.g. 2,2")
    if not 1 <= args.half_width <= 7:
        raise InputError("--half-width must lie in [1, 7]")
    t0 = time.perf_counter()
    summary, _ = run_covariance_trials(args.trials, dims, args.transform, args.half_width, args.seed)
    print(f"{'transform':<16}{'trials':>8}{'max_gap':>14}{'moved':>10}{'AP-PP gap':>14}")
    print(
        f"{summary.transform:<16}{summary.trials:>8}{summary.max_gap:>14.3e}"
        f"{summary.moved_fraction:>10.2%}{summary.max_picture_gap:>14.3e}"
    )
    if args.output:
        _emit_json(summary.__dict__, args.output)
        RunManifest(
            "covariance-check",
            {"trials": args.trials, "dims": dims, "transform": args.transform, "half_width": args.half_width},
            args.seed,
            args.boundary,
            duration_s=time.perf_counter() - t0,
        ).write_beside(Path(args.output))
    if summary.max_gap > IDENTITY_TOL:
        print(f"covariance violated: max gap {summary.max_gap:.3e} > {IDENTITY_TOL:g}", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


def _freefall_config(args) -> FreefallConfig:
    values: dict[str, object] = read_config_file(args.config) if args.config else {}
    for f in fields(FreefallConfig):
        v = getattr(args, f"ff_{f.name}", None)
        if v is not None:
            values[f.name] = v
    if args.boundary is not None:
        values["boundary_mode"] = args.boundary
    return FreefallConfig.from_mapping(values)


def freefall_csv(cfg: FreefallConfig, extended: bool = False, max_workers: int | None = None) -> str:
    snaps = run_simulation(cfg, max_workers)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = list(snaps[0].CSV_COLUMNS) if snaps else []
    if extended:
        header += ["discord_R", "discord_A", "coherence_R", "coherence_A"]
    writer.writerow(header)
    for s in snaps:
        if abs(s.Q_R + s.Qbar_R - s.info) > 1e-8 or abs(s.Q_A + s.Qbar_A - s.info) > 1e-8:
            raise InvariantError(f"decomposition failed at t_bar={s.t_bar}")
        row = list(s.row())
        if extended:
            r = coherence_discord_noninvariance(cfg, s.t_bar)
            row += [r.discord_R, r.discord_A, r.coherence_R, r.coherence_A]
        writer.writerow([f"{x:.17g}" for x in row])
    return buf.getvalue()


def cmd_freefall(args) -> int:
    cfg = _freefall_config(args)
    t0 = time.perf_counter()
    text = freefall_csv(cfg, args.extended, args.workers)
    if args.output:
        out = Path(args.output)
        out.write_text(text)
        RunManifest(
            "freefall",
            cfg.to_mapping() | {"times_used": cfg.times().tolist()},
            args.seed,
            cfg.boundary_mode,
            duration_s=time.perf_counter() - t0,
        ).write_beside(out)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def two_slit_report(cfg: TwoSlitConfig, boundary_mode: str = "wrap") -> dict:
    """Irreality, coherence, discord of B's position and the quantumness in both frames."""
    xset = ObservableSet.computational(cfg.dims)
    out: dict[str, object] = {}
    for frame, psi in (("R", two_slit_state(cfg)), ("A", two_slit_transformed(cfg, boundary_mode))):
        rho = psi.density_matrix()
        xb = xset[1]
        out[f"irreality_{frame}"] = irreality(rho, xb)
        out[f"coherence_B_{frame}"] = coherence(partial_trace(rho, [1]), xb)
        out[f"discord_B_{frame}"] = discord_oneway(rho, xb)
        out[f"quantumness_{frame}"] = quantumness(rho, xset)
    out["quantumness_equal"] = bool(abs(out["quantumness_R"] - out["quantumness_A"]) <= 1e-10)
    return out


def cmd_two_slit(args) -> int:
    cfg = TwoSlitConfig(args.half_width, args.i, args.j, args.k)
    t0 = time.perf_counter()
    boundary = args.boundary or "wrap"
    _emit_json(two_slit_report(cfg, boundary), args.output)
    if args.output:
        RunManifest(
            "two-slit", cfg.__dict__, args.seed, boundary, duration_s=time.perf_counter() - t0
        ).write_beside(Path(args.output))
    return EXIT_OK


def gaussian_report(a, b, width_a, width_b, transform="position-swap", mass_a=1.0, mass_b=1.0, hbar=1.0) -> dict:
    state = product_gaussian(a, b, width_a, width_b, hbar)
    if transform == "position-swap":
        s = symplectic_for_position_swap()
    elif transform == "momentum-swap":
        s = symplectic_for_momentum_swap(mass_a, mass_b)
    elif transform == "identity":
        s = identity_transform()
    else:
        raise InputError(f"unknown transform {transform!r}")
    out = apply_symplectic(state, s)
    purity, entropy = residual_entanglement(out)
    alpha, zeta = crossing_term_params(a, width_b, width_a)
    return {
        "transform": transform,
        "mean": out.mean,
        "covariance": out.cov,
        "symplectic_error": float(np.max(np.abs(s.matrix @ OMEGA @ s.matrix.T - OMEGA))),
        "zeta": zeta,
        "alpha": alpha,
        "reduced_purity": purity,
        "entropy": entropy,
    }


def cmd_gaussian(args) -> int:
    t0 = time.perf_counter()
    report = gaussian_report(
        args.a, args.b, args.width_a, args.width_b, args.transform, args.mass_a, args.mass_b, args.hbar
    )
    _emit_json(report, args.output)
    if args.output:
        cfg = {k: getattr(args, k) for k in ("a", "b", "width_a", "width_b", "transform", "mass_a", "mass_b", "hbar")}
        RunManifest("gaussian-transform", cfg, args.seed, None, duration_s=time.perf_counter() - t0).write_beside(
            Path(args.output)
        )
    return EXIT_OK


# ------------------------------------------------------------------ parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qrescov", description="Quantum resource accounting across reference frames")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, boundary=False):
        sp.add_argument("--output", "-o", help="output file (default: stdout)")
        sp.add_argument("--seed", type=int, default=0)
        if boundary:
            sp.add_argument("--boundary", choices=("wrap", "truncate"))

    sp = sub.add_parser("decompose", help="information decomposition of one context")
    sp.add_argument("--state", help="state file (dims header + complex rows)")
    sp.add_argument("--scenario", choices=sorted(SCENARIOS))
    sp.add_argument("--basis", help="one letter per subsystem: Z or X (default ZZ)")
    sp.add_argument("--mu", help="unbiased partner set (default: Fourier partner of --basis)")
    sp.add_argument("--mu-variants", type=int, default=0, help="also evaluate N random unbiased partners")
    common(sp)
    sp.set_defaults(func=cmd_decompose)

    sp = sub.add_parser("covariance-check", help="fuzz Q + Qbar invariance under frame changes")
    sp.add_argument("--trials", type=int, default=200)
    sp.add_argument("--dims", default="2,2")
    sp.add_argument("--transform", choices=("random-unitary", "lattice-swap", "identity"), default="random-unitary")
    sp.add_argument("--half-width", type=int, default=3)
    common(sp)
    sp.add_argument("--boundary", choices=("wrap", "truncate"), default="wrap")
    sp.set_defaults(func=cmd_covariance_check)

    sp = sub.add_parser("freefall", help="quantumness gap between lab and particle frames")
    sp.add_argument("--config", help="flat key = value config file")
    sp.add_argument("--extended", action="store_true", help="add discord/coherence columns (full-state eigensolves)")
    sp.add_argument("--workers", type=int, default=None)
    for f in fields(FreefallConfig):
        if f.name == "boundary_mode":
            continue
        sp.add_argument("--" + f.name.replace("_", "-"), dest=f"ff_{f.name}", metavar="VALUE")
    common(sp, boundary=True)
    sp.set_defaults(func=cmd_freefall)

    sp = sub.add_parser("two-slit", help="reality of B's position in R's and A's frames")
    sp.add_argument("--i", type=int, required=True)
    sp.add_argument("--j", type=int, required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--half-width", "-L", type=int, default=7)
    common(sp, boundary=True)
    sp.set_defaults(func=cmd_two_slit)

    sp = sub.add_parser("gaussian-transform", help="frame change of a product Gaussian")
    sp.add_argument("--a", type=float, default=1.0, help="centre of A")
    sp.add_argument("--b", type=float, default=0.0, help="centre of B")
    sp.add_argument("--width-a", type=float, default=1.0, help="position width of A (Delta)")
    sp.add_argument("--width-b", type=float, default=1.0, help="position width of B (delta)")
    sp.add_argument("--transform", choices=("position-swap", "momentum-swap", "identity"), default="position-swap")
    sp.add_argument("--mass-a", type=float, default=1.0)
    sp.add_argument("--mass-b", type=float, default=1.0)
    sp.add_argument("--hbar", type=float, default=1.0)
    common(sp)
    sp.set_defaults(func=cmd_gaussian)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InvariantError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (InputError, LeakageError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except QRescovError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
