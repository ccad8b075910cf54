"""Acceptance criteria, one test each.

Every test prints a single ``criterion N: PASS|FAIL ...`` line (visible in
``pytest -v`` output) before asserting.  Run ``python3 tests/test_acceptance.py``
to get just the summary lines.
"""
import csv
import itertools
import math
import time
from pathlib import Path

import numpy as np
import pytest

import oracles
from qrescov.cli import run_covariance_trials
from qrescov.freefall import (
    FreefallConfig,
    coherence_discord_noninvariance,
    eta_limit_config,
    run_simulation,
    sharp_relative_config,
)
from qrescov.frames import fourier_mu_basis, momentum_set, mu_partner_set
from qrescov.gaussian import (
    apply_symplectic,
    crossing_term_params,
    product_gaussian,
    residual_entanglement,
    symplectic_for_position_swap,
)
from qrescov.hilbert import DensityMatrix, partial_trace
from qrescov.resources import (
    Context,
    ObservableBasis,
    ObservableSet,
    context_incompatibility,
    context_incompatibility_single,
    decompose,
    dephase_joint,
    irreality,
    quantumness,
)
from qrescov.scenarios import TwoSlitConfig, random_state, random_unitary, two_slit_state, two_slit_transformed

GOLDEN = Path(__file__).parent / "golden" / "freefall_default.csv"
DIMS = [(a, b) for a in (2, 3, 4) for b in (2, 3, 4)]


@pytest.fixture
def report(capsys):
    def _report(n, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
        return ok

    return _report


def _print_report(n, ok, detail):
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
    return ok


def check_decomposition(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = 0.0
    for n in range(500):
        dims = DIMS[int(rng.integers(len(DIMS)))]
        d = dims[0] * dims[1]
        seed = int(rng.integers(2**32))
        rank = 1 if n % 2 == 0 else int(rng.integers(2, d + 1))
        rho = random_state(dims, rank, seed=seed)
        if n % 4 < 2:
            obs = ObservableSet.computational(dims)
        else:
            obs = ObservableSet([ObservableBasis(k, random_unitary(dk, seed=seed + 1 + k)) for k, dk in enumerate(dims)])
        rep = decompose(rho, obs, mu_partner_set(obs))
        worst = max(worst, abs(rep.info - rep.quantumness - rep.incompatible_quantumness))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-9 and elapsed <= 60
    return report(1, ok, f"500 contexts, max |I - Q - Qbar| = {worst:.2e} (<= 1e-9), {elapsed:.1f} s (<= 60 s)")


def check_covariance(report):
    t0 = time.perf_counter()
    runs = []
    for n, dims in enumerate([(2, 2), (2, 3), (3, 3), (4, 4)]):
        runs.append(run_covariance_trials(25, dims, "random-unitary", seed=100 + n)[1])
    for n, L in enumerate((3, 5)):
        runs.append(run_covariance_trials(50, transform="lattice-swap", half_width=L, seed=200 + n)[1])
    results = [r for run in runs for r in run]
    gap = max(r.gap for r in results)
    picture = max(abs(r.rhs - r.rhs_passive) for r in results)
    moved = sum(abs(r.quantumness_before - r.quantumness_after) > 1e-3 for r in results) / len(results)
    elapsed = time.perf_counter() - t0
    ok = len(results) == 200 and gap <= 1e-9 and moved >= 0.5 and elapsed <= 300
    return report(
        2, ok,
        f"{len(results)} trials, max gap {gap:.2e} (<= 1e-9), AP-PP {picture:.2e}, "
        f"Q moved in {moved:.0%} (>= 50%), {elapsed:.1f} s",
    )


def check_erasure(report):
    worst = 0.0
    for dims in DIMS:
        d = dims[0] * dims[1]
        obs = ObservableSet.computational(dims)
        mu = momentum_set(dims)
        for seed in range(100):
            rho = random_state(dims, 1 if seed % 2 == 0 else d, seed=seed)
            out = dephase_joint(dephase_joint(rho, obs), mu)
            worst = max(worst, float(np.max(np.abs(out.data - np.eye(d) / d))))
    return report(3, worst <= 1e-10, f"900 states, max |Phi_mu Phi_O(rho) - 1/d| = {worst:.2e} (<= 1e-10)")


def check_two_slit(report):
    worst_r = worst_a = worst_q = 0.0
    count = 0
    for i, j, k in itertools.product((-2, 1, 3), (-1, 2, 4), (-3, 1, 2)):
        cfg = TwoSlitConfig(7, i, j, k)
        xset = ObservableSet.computational(cfg.dims)
        rho = two_slit_state(cfg).density_matrix()
        rho_p = two_slit_transformed(cfg).density_matrix()
        worst_r = max(worst_r, abs(irreality(rho, xset[1]) - math.log(2)))
        worst_a = max(worst_a, irreality(rho_p, xset[1]))
        worst_q = max(worst_q, abs(quantumness(rho, xset) - quantumness(rho_p, xset)))
        count += 1
    ok = count == 27 and worst_r <= 1e-12 and worst_a <= 1e-12 and worst_q <= 1e-10
    return report(
        4, ok,
        f"{count} configs, |irr_R - ln2| {worst_r:.1e}, irr_A {worst_a:.1e} (<= 1e-12), Q gap {worst_q:.1e} (<= 1e-10)",
    )


def check_freefall(report):
    t0 = time.perf_counter()
    snaps = run_simulation(FreefallConfig())
    elapsed = time.perf_counter() - t0
    target = 2 * math.log(31)
    ident = max(max(abs(s.Q_R + s.Qbar_R - target), abs(s.Q_A + s.Qbar_A - target)) for s in snaps)
    peak = max(abs(s.delta_percent) for s in snaps if s.t_bar > 0)
    with open(GOLDEN) as fh:
        rows = list(csv.DictReader(fh))
    golden_gap = max(
        abs(value - float(row[key]))
        for row, s in zip(rows, snaps)
        for key, value in zip(s.CSV_COLUMNS, s.row())
    )
    ok = (
        len(snaps) == 50 and ident <= 1e-8 and peak > 0.01
        and len(rows) == 50 and golden_gap <= 1e-10 and elapsed <= 300
    )
    return report(
        5, ok,
        f"50 steps, identity err {ident:.1e} (<= 1e-8), max |Delta| {peak:.3f} pp (> 0.01), "
        f"golden gap {golden_gap:.1e}, {elapsed:.2f} s",
    )


def check_limits(report):
    t0 = time.perf_counter()
    eta = coherence_discord_noninvariance(eta_limit_config(1e-3), 0.0)
    t_eta = time.perf_counter() - t0
    t0 = time.perf_counter()
    sharp = coherence_discord_noninvariance(sharp_relative_config(0.05), 0.0)
    t_sharp = time.perf_counter() - t0
    ok = (
        eta.discord_A <= 1e-6 and eta.discord_R >= 0.01
        and sharp.coherence_R <= 1e-6 and sharp.coherence_A >= 0.01
        and t_eta <= 120 and t_sharp <= 120
    )
    return report(
        6, ok,
        f"eta=1e-3: D'={eta.discord_A:.1e}, D={eta.discord_R:.3f} ({t_eta:.1f} s); "
        f"sigma_r=0.05: C={sharp.coherence_R:.1e}, C'={sharp.coherence_A:.3f} ({t_sharp:.1f} s)",
    )


def check_gaussian(report):
    widths = np.linspace(0.2, 5.0, 5)
    a = 1.0
    bad_purity = []
    worst_rel = worst_param = 0.0
    for delta, Delta in itertools.product(widths, widths):
        # Delta belongs to the frame particle A, delta to B
        out = apply_symplectic(product_gaussian(a, 0.0, Delta, delta), symplectic_for_position_swap())
        purity, ent = residual_entanglement(out)
        if not purity < 1 - 1e-3:
            bad_purity.append((float(delta), float(Delta), round(purity, 6)))
        ref = oracles.schmidt_entropy_swapped_gaussian(a, 0.0, Delta, delta)
        worst_rel = max(worst_rel, abs(ent - ref) / ref)
        alpha, zeta = crossing_term_params(a, delta, Delta)
        z_ref = delta * Delta / math.sqrt(delta**2 + Delta**2)
        worst_param = max(worst_param, abs(zeta - z_ref), abs(alpha - a * z_ref**2 / Delta**2))
    ok = not bad_purity and worst_rel <= 0.01 and worst_param <= 1e-12
    return report(
        7, ok,
        f"purity < 1-1e-3 in {25 - len(bad_purity)}/25 cells (fails at (delta, Delta, purity) {bad_purity}); "
        f"entropy vs Schmidt oracle {worst_rel:.1e} rel (<= 1%); zeta/alpha err {worst_param:.1e} (<= 1e-12)",
    )


def check_context_axioms(report):
    rng = np.random.default_rng(77)
    worst_same = worst_flat = 0.0
    for n in range(200):
        dims = DIMS[n % len(DIMS)]
        d = dims[0] * dims[1]
        seed = int(rng.integers(2**32))
        obs = ObservableSet([ObservableBasis(k, random_unitary(dk, seed=seed + k)) for k, dk in enumerate(dims)])
        mu = mu_partner_set(obs)
        rho = random_state(dims, int(rng.integers(1, d + 1)), seed=seed + 5)
        worst_same = max(worst_same, context_incompatibility(Context(rho, obs, obs)))
        # mixtures of partner-basis product states dephase to 1/d under obs
        frame = mu.measurement().frame
        weights = rng.dirichlet(np.ones(d))
        flat = DensityMatrix(frame @ np.diag(weights) @ frame.conj().T, dims, check_psd=False)
        other = ObservableSet([ObservableBasis(k, random_unitary(dk, seed=seed + 9 + k)) for k, dk in enumerate(dims)])
        worst_flat = max(worst_flat, context_incompatibility(Context(flat, obs, other)))
        # single-subsystem versions
        b = obs[0].on(0)
        red = partial_trace(rho, [0])
        worst_same = max(worst_same, context_incompatibility_single(red, b, b))
        flat_a = partial_trace(flat, [0])
        worst_flat = max(worst_flat, context_incompatibility_single(flat_a, b, fourier_mu_basis(dims[0])))
    ok = worst_same <= 1e-10 and worst_flat <= 1e-10
    return report(8, ok, f"200 seeds, coinciding bases {worst_same:.1e}, flat first dephasing {worst_flat:.1e} (<= 1e-10)")


CHECKS = [
    check_decomposition,
    check_covariance,
    check_erasure,
    check_two_slit,
    check_freefall,
    check_limits,
    check_gaussian,
    check_context_axioms,
]


def test_criterion_1_decomposition(report):
    assert check_decomposition(report)


def test_criterion_2_covariance(report):
    assert check_covariance(report)


def test_criterion_3_mu_erasure(report):
    assert check_erasure(report)


def test_criterion_4_two_slit(report):
    assert check_two_slit(report)


def test_criterion_5_freefall(report):
    assert check_freefall(report)


def test_criterion_6_limits(report):
    assert check_limits(report)


def test_criterion_7_gaussian(report):
    assert check_gaussian(report)


def test_criterion_8_context_axioms(report):
    assert check_context_axioms(report)


if __name__ == "__main__":
    import sys

    results = [check(_print_report) for check in CHECKS]
    sys.exit(0 if all(results) else 1)
