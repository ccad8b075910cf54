import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from qrescov.exceptions import DimensionError, InputError, NotUnbiasedError
from qrescov.frames import fourier_mu_basis, momentum_set, mu_partner_set, position_set
from qrescov.hilbert import DensityMatrix, PureState, partial_trace, tensor
from qrescov.resources import (
    Context,
    ObservableBasis,
    ObservableSet,
    coherence,
    context_incompatibility,
    context_incompatibility_single,
    covariance_check,
    decompose,
    dephase,
    dephase_joint,
    discord_oneway,
    discord_symmetric,
    incompatible_quantumness,
    information,
    irreality,
    mutual_information,
    quantumness,
)
from qrescov.scenarios import bell_state, classical_correlated, plus_zero, random_state, random_unitary

LN2 = math.log(2)
ZZ = ObservableSet.computational((2, 2))
XX = momentum_set((2, 2))
Z = ObservableBasis.computational(0, 2)
X = fourier_mu_basis(2)
PLUS = PureState(np.array([1, 1]) / math.sqrt(2), (2,))

dims_st = st.tuples(st.integers(2, 4), st.integers(2, 4))
seeds = st.integers(0, 2**32 - 1)


def _random_context(dims, seed, pure):
    d = dims[0] * dims[1]
    rank = 1 if pure else int(np.random.default_rng(seed).integers(2, d + 1))
    rho = random_state(dims, rank, seed=seed)
    obs = ObservableSet([ObservableBasis(k, random_unitary(dk, seed=seed + 10 + k)) for k, dk in enumerate(dims)])
    return rho, obs, mu_partner_set(obs)


# ---------------------------------------------------------------- examples


def test_dephase_examples():
    assert np.allclose(dephase(PLUS, Z).data, np.eye(2) / 2)
    diag = DensityMatrix(np.diag([0.3, 0.7]), (2,))
    assert np.allclose(dephase(diag, Z).data, diag.data)
    out = dephase(bell_state(), ZZ[0])
    assert np.allclose(out.data, np.diag([0.5, 0, 0, 0.5]))
    # oracle: explicit projector sum
    ref = oracles.projector_dephase(bell_state().density_matrix().data, np.eye(2), 0, 2, 2)
    assert np.allclose(out.data, ref)


def test_dephase_rejects_wrong_dimension():
    with pytest.raises(DimensionError):
        dephase(bell_state(), ObservableBasis.computational(0, 3))
    with pytest.raises(DimensionError):
        dephase(bell_state(), ObservableBasis.computational(2, 2))


def test_dephase_joint_examples():
    assert np.allclose(dephase_joint(bell_state(), ZZ).data, np.diag([0.5, 0, 0, 0.5]))
    basis = PureState.basis((2, 3), (1, 2))
    assert np.allclose(dephase_joint(basis, ObservableSet.computational((2, 3))).data, basis.density_matrix().data)


def test_information_examples():
    assert information(DensityMatrix.maximally_mixed((2, 3))) == pytest.approx(0, abs=1e-12)
    assert information(bell_state()) == pytest.approx(math.log(4))
    assert information(DensityMatrix(np.diag([0.75, 0.25]), (2,))) == pytest.approx(0.130812035941137, abs=1e-12)


def test_coherence_examples():
    assert coherence(PLUS, Z) == pytest.approx(LN2)
    rho = random_state((3,), 3, seed=4)
    _, v = np.linalg.eigh(rho.data)
    assert coherence(rho, ObservableBasis(0, v)) == pytest.approx(0, abs=1e-12)
    assert coherence(DensityMatrix.maximally_mixed((2,)), X) == pytest.approx(0, abs=1e-12)
    with pytest.raises(DimensionError):
        coherence(bell_state(), Z)


def test_mutual_information_examples():
    prod = tensor(random_state((2,), 2, seed=1), random_state((3,), 2, seed=2))
    assert mutual_information(prod) == pytest.approx(0, abs=1e-12)
    assert mutual_information(bell_state()) == pytest.approx(2 * LN2)
    assert mutual_information(classical_correlated()) == pytest.approx(LN2)
    with pytest.raises(DimensionError):
        mutual_information(PLUS)


def test_discord_examples():
    assert discord_oneway(bell_state(), ZZ[0]) == pytest.approx(LN2)
    prod = tensor(random_state((2,), 2, seed=1), random_state((2,), 1, seed=2))
    assert discord_oneway(prod, X) == pytest.approx(0, abs=1e-12)
    measured = dephase(random_state((2, 3), 4, seed=9), ZZ[0])
    assert discord_oneway(measured, ZZ[0]) == pytest.approx(0, abs=1e-12)


def test_symmetric_discord_examples():
    assert discord_symmetric(bell_state(), ZZ) == pytest.approx(LN2)
    assert discord_symmetric(classical_correlated(), ZZ) == pytest.approx(0, abs=1e-12)
    assert discord_symmetric(plus_zero(), ZZ) == pytest.approx(0, abs=1e-12)


def test_quantumness_examples():
    assert quantumness(bell_state(), ZZ) == pytest.approx(LN2)
    assert quantumness(DensityMatrix.maximally_mixed((2, 2)), ZZ) == pytest.approx(0, abs=1e-12)
    rho = plus_zero()
    assert quantumness(rho, ZZ) == pytest.approx(LN2)
    assert coherence(partial_trace(rho, [0]), ZZ[0]) == pytest.approx(LN2)


def test_context_incompatibility_single_examples():
    zero = PureState.basis((2,), (0,))
    assert context_incompatibility_single(zero, Z, X) == pytest.approx(LN2)
    rho = random_state((3,), 2, seed=3)
    b = ObservableBasis(0, random_unitary(3, seed=8))
    assert context_incompatibility_single(rho, b, b) == pytest.approx(0, abs=1e-12)
    assert context_incompatibility_single(DensityMatrix.maximally_mixed((2,)), Z, X) == pytest.approx(0, abs=1e-12)


def test_context_incompatibility_examples():
    rho = random_state((2, 3), 3, seed=12)
    obs = ObservableSet.computational((2, 3))
    mu = momentum_set((2, 3))
    assert context_incompatibility(Context(rho, obs, mu)) == pytest.approx(information(dephase_joint(rho, obs)), abs=1e-12)
    assert context_incompatibility(Context(rho, obs, obs)) == pytest.approx(0, abs=1e-12)
    assert context_incompatibility(Context(bell_state(), ZZ, XX)) == pytest.approx(LN2)


def test_incompatible_quantumness_examples():
    assert incompatible_quantumness(DensityMatrix.maximally_mixed((2, 2)), ZZ, XX) == pytest.approx(0, abs=1e-12)
    assert incompatible_quantumness(bell_state(), ZZ, XX) == pytest.approx(LN2)
    varrho = random_state((3, 2), 5, seed=21)
    obs = ObservableSet.computational((3, 2))
    mu = momentum_set((3, 2))
    assert incompatible_quantumness(dephase_joint(varrho, mu), obs, mu) == pytest.approx(0, abs=1e-12)


def test_incompatible_quantumness_rejects_biased_partner():
    with pytest.raises(NotUnbiasedError):
        incompatible_quantumness(bell_state(), ZZ, ZZ)
    with pytest.raises(NotUnbiasedError):
        incompatible_quantumness(bell_state(), ZZ, ObservableSet.computational((2, 3)))


def test_irreality_examples():
    rho = random_state((2, 3), 6, seed=2)
    omega = dephase(rho, ZZ[0].on(0))
    assert irreality(omega, ObservableBasis.computational(0, 2)) == pytest.approx(0, abs=1e-12)
    assert irreality(bell_state(), ZZ[0]) == pytest.approx(LN2)


def test_decompose_examples():
    rep = decompose(DensityMatrix.maximally_mixed((2, 2)), ZZ, XX)
    assert all(abs(v) <= 1e-12 for v in rep.to_dict().values())

    prod = PureState.basis((3, 2), (2, 1))
    rep = decompose(prod, ObservableSet.computational((3, 2)), momentum_set((3, 2)))
    assert rep.info == pytest.approx(math.log(6))
    assert rep.quantumness == pytest.approx(0, abs=1e-12)
    assert rep.incompatible_quantumness == pytest.approx(math.log(6))

    rep = decompose(bell_state(), ZZ, XX)
    assert rep.info == pytest.approx(2 * LN2)
    assert rep.quantumness == pytest.approx(LN2)
    assert rep.incompatible_quantumness == pytest.approx(LN2)
    assert rep.discord_sym == pytest.approx(LN2)
    assert set(rep.to_dict()) >= {"info", "quantumness", "incompatible_quantumness", "irreality_A"}


def test_covariance_examples():
    rho = random_state((2, 3), 3, seed=1)
    obs = ObservableSet.computational((2, 3))
    mu = momentum_set((2, 3))
    res = covariance_check(rho, obs, mu, np.eye(6), obs, mu)
    assert res.gap == 0.0

    pure = random_state((3, 3), 1, seed=5)
    res = covariance_check(pure, position_set((3, 3)), momentum_set((3, 3)), random_unitary(9, seed=2),
                           position_set((3, 3)), momentum_set((3, 3)))
    assert res.lhs == pytest.approx(math.log(9), abs=1e-9)
    assert res.rhs == pytest.approx(math.log(9), abs=1e-9)


def test_observable_validation():
    with pytest.raises(InputError):
        ObservableBasis(0, np.ones((2, 2)))
    with pytest.raises(DimensionError):
        ObservableBasis(0, np.eye(3)[:, :2])
    with pytest.raises(InputError):
        ObservableSet([Z, Z])
    with pytest.raises(InputError):
        ObservableSet([ObservableBasis.computational(1, 2)])


# -------------------------------------------------------------- properties


@settings(max_examples=80, deadline=None)
@given(dims_st, seeds, st.booleans())
def test_nonnegativity_and_decomposition(dims, seed, pure):
    rho, obs, mu = _random_context(dims, seed, pure)
    rep = decompose(rho, obs, mu)
    assert min(rep.to_dict().values()) >= -1e-9
    assert abs(rep.info - rep.quantumness - rep.incompatible_quantumness) <= 1e-9


@settings(max_examples=50, deadline=None)
@given(dims_st, seeds, st.booleans())
def test_matches_projector_oracle(dims, seed, pure):
    rho, obs, mu = _random_context(dims, seed, pure)
    da, db = dims
    info, q, qbar = oracles.decomposition(
        rho.data, obs[0].vectors, obs[1].vectors, mu[0].vectors, mu[1].vectors, da, db
    )
    rep = decompose(rho, obs, mu)
    assert rep.info == pytest.approx(info, abs=1e-9)
    assert rep.quantumness == pytest.approx(q, abs=1e-9)
    assert rep.incompatible_quantumness == pytest.approx(qbar, abs=1e-9)


@settings(max_examples=50, deadline=None)
@given(dims_st, seeds)
def test_dephasing_idempotent_and_commuting(dims, seed):
    rho, obs, _ = _random_context(dims, seed, False)
    once = dephase(rho, obs[0])
    assert np.max(np.abs(dephase(once, obs[0]).data - once.data)) <= 1e-12
    ab = dephase(dephase(rho, obs[0]), obs[1])
    ba = dephase(dephase(rho, obs[1]), obs[0])
    assert np.max(np.abs(ab.data - ba.data)) <= 1e-12
    assert abs(np.trace(once.data).real - 1) <= 1e-12


@settings(max_examples=50, deadline=None)
@given(dims_st, seeds)
def test_post_measurement_depletion(dims, seed):
    rho, obs, _ = _random_context(dims, seed, False)
    after = dephase(rho, obs[0])
    assert coherence(partial_trace(after, [0]), obs[0]) <= 1e-9
    assert discord_oneway(after, obs[0]) <= 1e-9


@settings(max_examples=50, deadline=None)
@given(dims_st, seeds, st.booleans())
def test_discord_chain_rule(dims, seed, pure):
    rho, obs, _ = _random_context(dims, seed, pure)
    chain = discord_oneway(rho, obs[0]) + discord_oneway(dephase(rho, obs[0]), obs[1])
    assert abs(chain - discord_symmetric(rho, obs)) <= 1e-9


@settings(max_examples=50, deadline=None)
@given(dims_st, seeds)
def test_fourier_erasure(dims, seed):
    rho = random_state(dims, dims[0] * dims[1], seed=seed)
    obs = ObservableSet.computational(dims)
    out = dephase_joint(dephase_joint(rho, obs), momentum_set(dims))
    d = dims[0] * dims[1]
    assert np.max(np.abs(out.data - np.eye(d) / d)) <= 1e-10


@settings(max_examples=40, deadline=None)
@given(dims_st, seeds, st.booleans())
def test_covariance_random_unitary(dims, seed, pure):
    rho, _, _ = _random_context(dims, seed, pure)
    obs = ObservableSet.computational(dims)
    mu = momentum_set(dims)
    t = random_unitary(dims[0] * dims[1], seed=seed + 99)
    res = covariance_check(rho, obs, mu, t, obs, mu)
    assert res.gap <= 1e-9
    assert abs(res.rhs - res.rhs_passive) <= 1e-9


@settings(max_examples=40, deadline=None)
@given(dims_st, seeds)
def test_irreality_split(dims, seed):
    rho, obs, _ = _random_context(dims, seed, False)
    for b in obs.bases:
        red = partial_trace(rho, [b.subsystem])
        assert abs(irreality(rho, b) - coherence(red, b) - discord_oneway(rho, b)) <= 1e-9
