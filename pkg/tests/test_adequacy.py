"""Tests for the chi-squared adequacy test."""

import math

import numpy as np
import pytest
from scipy import stats

from engines import adequacy, protocol, reconstruct, simulate, states
from exceptions import ContractError, DimensionError, NotTestableError
from models import CountRecord


def test_chi2_statistic_exact_values():
    rec = CountRecord(counts=np.array([12.0, 8.0]), times=np.array([10.0, 10.0]))
    assert adequacy.chi2_statistic(rec, [1.0, 1.0]) == pytest.approx(0.8)
    rec = CountRecord(counts=np.array([10.0, 20.0]), times=np.array([10.0, 10.0]))
    assert adequacy.chi2_statistic(rec, [1.0, 2.0]) == 0.0


def test_chi2_statistic_zero_expectation():
    rec = CountRecord(counts=np.array([3.0, 0.0]), times=np.ones(2))
    assert adequacy.chi2_statistic(rec, [0.0, 1.0]) == math.inf
    rec = CountRecord(counts=np.array([0.0, 4.0]), times=np.ones(2))
    assert adequacy.chi2_statistic(rec, [0.0, 4.0]) == 0.0


def test_chi2_statistic_length_mismatch():
    rec = CountRecord(counts=np.ones(2), times=np.ones(2))
    with pytest.raises(DimensionError):
        adequacy.chi2_statistic(rec, [1.0, 1.0, 1.0])


def _fitted(p, state, n, r, seed=None):
    rho = state.density()
    p_n = protocol.set_times_for_sample(p, rho, n)
    if seed is None:
        rec = CountRecord(counts=simulate.expected_counts(p_n, rho), times=p_n.times)
    else:
        rec = simulate.simulate_counts(p_n, rho, seed)
    return rec, reconstruct.mle(p, rec, r)


def test_noiseless_data_is_adequate(dodeca, pure_qubit):
    rec, result = _fitted(dodeca, pure_qubit, 1e5, 1)
    report = adequacy.adequacy_test(dodeca, rec, result)
    assert report.dof == 9
    assert report.statistic == pytest.approx(0.0, abs=1e-6)
    assert report.p_value == pytest.approx(1.0, abs=1e-6)
    assert report.adequate


def test_poisson_data_is_usually_adequate(cube, pure_qubit):
    passed = 0
    for seed in range(20):
        rec, result = _fitted(cube, pure_qubit, 1e4, 1, seed=seed)
        passed += adequacy.adequacy_test(cube, rec, result, alpha=0.01).adequate
    assert passed >= 17


def test_tetrahedron_full_rank_not_testable(tetra, pure_qubit):
    rec, result = _fitted(tetra, pure_qubit, 1e4, 2)
    with pytest.raises(NotTestableError):
        adequacy.adequacy_test(tetra, rec, result)


def test_alpha_range(cube, pure_qubit):
    rec, result = _fitted(cube, pure_qubit, 1e4, 1)
    for alpha in (0.0, 1.0, -0.5):
        with pytest.raises(ContractError):
            adequacy.adequacy_test(cube, rec, result, alpha)


@pytest.mark.slow
def test_two_qubit_chi2_follows_its_distribution(tetra2):
    truth = states.random_pure(4, 5).density()
    runs = simulate.run_batch(tetra2, truth, 1, 1e5, 1000, seed=13)
    chi2 = [adequacy.chi2_statistic(run.record, run.result.lambda_hat) for run in runs if run.ok]
    assert len(chi2) == 1000
    assert stats.kstest(chi2, "chi2", args=(9,)).pvalue > 0.01


@pytest.mark.slow
def test_underfit_rank_is_rejected(tetra2):
    truth = states.random_mixed(4, 2, 6)
    runs = simulate.run_batch(tetra2, truth, 1, 1e6, 200, seed=14)
    p_values = [
        adequacy.adequacy_test(tetra2, run.record, run.result).p_value for run in runs if run.ok
    ]
    assert len(p_values) == 200
    assert np.mean(np.array(p_values) < 0.01) >= 0.99
