"""Tests for the linear-algebra kernels."""

import numpy as np
import pytest
from scipy import stats

from engines import numerics
from exceptions import ContractError, NotPSDError


def test_svd_reconstructs_matrix(rng):
    M = rng.standard_normal((6, 4)) + 1j * rng.standard_normal((6, 4))
    U, S, V = numerics.svd(M, full=False)
    assert np.all(np.diff(S) <= 0)
    assert np.allclose((U * S) @ V.conj().T, M)


def test_svd_rejects_non_finite():
    with pytest.raises(ContractError):
        numerics.svd(np.array([[1.0, np.nan], [0.0, 1.0]]))


def test_rank_of_counts_relative_to_largest():
    assert numerics.rank_of(np.array([2.0, 1.0, 1e-12])) == 2
    assert numerics.rank_of(np.array([0.0, 0.0])) == 0


def test_eigh_rejects_non_hermitian():
    with pytest.raises(ContractError):
        numerics.eigh(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_psd_spectrum_clips_rounding_noise():
    H = np.diag([1.0, -1e-12, 0.5])
    w = numerics.psd_spectrum(H).eigenvalues
    assert w.min() == 0.0


def test_psd_spectrum_rejects_negative_eigenvalue():
    with pytest.raises(NotPSDError):
        numerics.psd_spectrum(np.diag([1.0, -0.1]))


def test_sqrtm_psd_squares_back(rng):
    A = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    H = A @ A.conj().T
    root = numerics.sqrtm_psd(H)
    assert np.allclose(root @ root, H)
    assert np.allclose(root, root.conj().T)


def test_pinv_matches_numpy(rng):
    M = rng.standard_normal((5, 3)) + 1j * rng.standard_normal((5, 3))
    assert np.allclose(numerics.pinv(M), np.linalg.pinv(M))


def test_pinv_negative_tolerance():
    with pytest.raises(ContractError):
        numerics.pinv(np.eye(2), tol=-1.0)


@pytest.mark.parametrize("x,dof", [(0.5, 1), (3.0, 4), (12.0, 9), (40.0, 15)])
def test_chi2_matches_scipy(x, dof):
    assert numerics.chi2_cdf(x, dof) == pytest.approx(stats.chi2.cdf(x, dof), rel=1e-12)
    assert numerics.chi2_sf(x, dof) == pytest.approx(stats.chi2.sf(x, dof), rel=1e-10)


def test_chi2_edge_cases():
    assert numerics.chi2_sf(float("inf"), 3) == 0.0
    assert numerics.chi2_cdf(0.0, 2) == 0.0
    with pytest.raises(ContractError):
        numerics.chi2_cdf(1.0, 0)
    with pytest.raises(ContractError):
        numerics.chi2_sf(-1.0, 2)
