"""Tests for the zero approximation, likelihood maximization and rank selection."""

import math

import numpy as np
import pytest
from scipy.stats import unitary_group

from engines import protocol, reconstruct, simulate, states
from exceptions import ContractError, DegenerateStateError, DimensionError, IncompleteProtocolError
from models import CountRecord, MleOptions, PolyhedronKind, Purification


def _noiseless(p, rho, n):
    """Expected counts as a record, times set for sample size n."""
    p_n = protocol.set_times_for_sample(p, rho, n)
    return CountRecord(counts=simulate.expected_counts(p_n, rho), times=p_n.times)


def test_pseudo_inverse_recovers_noiseless_state(cube):
    rho = states.random_mixed(2, 2, 4)
    est = reconstruct.pseudo_inverse_estimate(cube, _noiseless(cube, rho, 1e5))
    assert np.allclose(est.rho, rho.rho, atol=1e-9)


def test_pseudo_inverse_needs_complete_protocol():
    p = protocol.from_rows([[1, 0], [0, 1], [1 / math.sqrt(2), 1 / math.sqrt(2)]])
    rec = CountRecord(counts=np.array([5.0, 5.0, 5.0]), times=np.ones(3))
    with pytest.raises(IncompleteProtocolError):
        reconstruct.pseudo_inverse_estimate(p, rec)


@pytest.mark.parametrize("kind", list(PolyhedronKind))
def test_mle_exact_on_noiseless_pure_data(kind):
    p = protocol.single_qubit_protocol(kind)
    for seed in range(5):
        truth = states.random_pure(2, seed)
        result = reconstruct.mle(p, _noiseless(p, truth.density(), 1e5), 1)
        assert result.converged
        assert states.uhlmann_fidelity(truth, result.c_hat) >= 1 - 1e-9


def test_mle_exact_on_two_qubit_noiseless_data(tetra2):
    for seed in range(3):
        truth = states.random_pure(4, seed)
        result = reconstruct.mle(tetra2, _noiseless(tetra2, truth.density(), 1e6), 1)
        assert states.fidelity(truth.density(), result.rho_hat) >= 1 - 1e-9


def test_mle_mixed_state(cube):
    truth = states.random_mixed(2, 2, 3)
    result = reconstruct.mle(cube, _noiseless(cube, truth, 1e6), 2)
    assert result.rank == 2
    assert states.fidelity(truth, result.rho_hat) >= 1 - 1e-9


@pytest.mark.parametrize("r", [1, 2])
def test_mle_is_gauge_robust(cube, r):
    truth = states.random_mixed(2, 2, 3)
    p = protocol.set_times_for_sample(cube, truth, 1e4)
    rec = simulate.simulate_counts(p, truth, seed=4)
    start = states.random_purification(2, r, seed=5)
    U = unitary_group.rvs(r, random_state=6) if r > 1 else np.array([[np.exp(0.7j)]])
    a = reconstruct.mle(cube, rec, r, start=start)
    b = reconstruct.mle(cube, rec, r, start=Purification(start.c @ U))
    assert np.allclose(a.rho_hat.rho, b.rho_hat.rho, atol=1e-9)
    assert states.fidelity(truth, a.rho_hat) == pytest.approx(
        states.fidelity(truth, b.rho_hat), abs=1e-10
    )


def test_mle_lambda_hat_matches_total_counts(dodeca, pure_qubit):
    rho = pure_qubit.density()
    p = protocol.set_times_for_sample(dodeca, rho, 1e4)
    rec = simulate.simulate_counts(p, rho, seed=2)
    result = reconstruct.mle(dodeca, rec, 1)
    assert float(np.dot(result.lambda_hat, rec.times)) == pytest.approx(rec.total)
    assert result.loglik == result.loglik_trace[-1]


def test_mle_loglik_does_not_decrease(tetra, pure_qubit):
    rho = pure_qubit.density()
    p = protocol.set_times_for_sample(tetra, rho, 1e3)
    result = reconstruct.mle(tetra, simulate.simulate_counts(p, rho, seed=8), 1)
    trace = np.array(result.loglik_trace)
    assert np.all(np.diff(trace) >= -1e-9 * np.abs(trace[1:]))


def test_mle_iteration_cap(tetra, pure_qubit):
    rho = pure_qubit.density()
    p = protocol.set_times_for_sample(tetra, rho, 1e3)
    rec = simulate.simulate_counts(p, rho, seed=1)
    result = reconstruct.mle(tetra, rec, 1, MleOptions(max_iter=1))
    assert result.iterations <= 1
    assert not result.converged


def test_mle_validation(tetra):
    rec = CountRecord(counts=np.ones(4), times=np.ones(4))
    with pytest.raises(ContractError):
        reconstruct.mle(tetra, rec, 3)
    with pytest.raises(DimensionError):
        reconstruct.mle(tetra, CountRecord(counts=np.ones(3), times=np.ones(3)), 1)
    with pytest.raises(DegenerateStateError):
        reconstruct.mle(tetra, CountRecord(counts=np.zeros(4), times=np.ones(4)), 1)


def test_mle_options_validation():
    with pytest.raises(ContractError):
        MleOptions(step=0.0)
    with pytest.raises(ContractError):
        MleOptions(alpha=1.0)


def test_reconstruct_auto_selects_rank_one_for_pure_data(cube, pure_qubit):
    selection = reconstruct.reconstruct_auto(cube, _noiseless(cube, pure_qubit.density(), 1e5))
    assert selection.adequate
    assert selection.rank == 1
    assert selection.candidates[0].report.p_value > 0.99
    assert [cand.rank for cand in selection.candidates] == [1, 2]
    assert selection.candidates[1].report is not None


def test_reconstruct_auto_rejects_underfit(cube):
    truth = states.white_noise_mix(0.5, states.random_pure(2, 6))
    rec = _noiseless(cube, truth, 1e7)
    selection = reconstruct.reconstruct_auto(cube, rec, MleOptions(ranks=(1,)))
    assert not selection.adequate
    assert selection.candidates[0].report.p_value < 1e-6


@pytest.mark.slow
def test_median_loss_scales_inversely_with_sample_size(tetra):
    truth = states.random_pure(2, 12).density()
    medians = []
    for n in (1e4, 4e4):
        runs = simulate.run_batch(tetra, truth, 1, n, 1000, seed=21)
        medians.append(np.median([run.loss for run in runs if run.ok]))
    assert 3.2 <= medians[0] / medians[1] <= 4.8
