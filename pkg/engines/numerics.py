"""Dense complex linear-algebra kernels and the chi-squared distribution function."""

from __future__ import annotations

import logging

import numpy as np
import numpy.typing as npt
from scipy import special

from config import HERMITIAN_TOL, PSD_CLIP_TOL, SVD_ZERO_RTOL, ZERO_EIG_RTOL
from exceptions import ContractError, NotPSDError, NumericError
from models import ComplexMatrix, HermitianEig, RealVector

logger = logging.getLogger(__name__)


def _finite(M: npt.ArrayLike) -> np.ndarray:
    arr = np.asarray(M)
    if not np.all(np.isfinite(arr)):
        raise ContractError("matrix has non-finite entries")
    return arr


def svd(
    M: npt.ArrayLike, full: bool = True
) -> tuple[ComplexMatrix, RealVector, ComplexMatrix]:
    """Singular value decomposition M = U diag(S) V^dagger.

    Returns (U, S, V) with S descending. With `full=False` the thin factors
    are returned, which is what every caller inside the package uses for
    tall measurement matrices.
    """
    arr = _finite(M)
    try:
        U, S, Vh = np.linalg.svd(arr, full_matrices=full)
    except np.linalg.LinAlgError as exc:
        raise NumericError(
            f"SVD did not converge for a {arr.shape[0]}x{arr.shape[1]} matrix "
            f"(Frobenius norm {np.linalg.norm(arr):.6g})"
        ) from exc
    return U, S, Vh.conj().T


def rank_of(S: RealVector, rtol: float = SVD_ZERO_RTOL) -> int:
    """Number of singular values above rtol * S_max."""
    if len(S) == 0 or S[0] == 0:
        return 0
    return int(np.count_nonzero(S > rtol * S[0]))


def eigh(H: npt.ArrayLike) -> HermitianEig:
    """Eigen-decomposition of a Hermitian matrix, eigenvalues ascending."""
    arr = _finite(H)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ContractError(f"eigh needs a square matrix, got {arr.shape}")
    scale = max(1.0, float(np.max(np.abs(arr), initial=0.0)))
    if np.max(np.abs(arr - arr.conj().T), initial=0.0) > HERMITIAN_TOL * scale:
        raise ContractError("eigh input is not Hermitian")
    try:
        w, V = np.linalg.eigh(arr)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigh did not converge for a {arr.shape[0]}-square matrix") from exc
    return HermitianEig(eigenvalues=w, eigenvectors=V)


def psd_spectrum(H: npt.ArrayLike) -> HermitianEig:
    """Eigen-decomposition with rounding noise removed from the spectrum.

    Negative eigenvalues above -PSD_CLIP_TOL (relative to the spectral scale)
    are clipped to zero, as are positive ones below ZERO_EIG_RTOL * w_max.
    """
    eig = eigh(H)
    w = eig.eigenvalues
    scale = max(1.0, float(np.max(np.abs(w), initial=0.0)))
    if w.size and w[0] < -PSD_CLIP_TOL * scale:
        raise NotPSDError(f"matrix is not positive semidefinite (eigenvalue {w[0]:.3g})")
    w = np.clip(w, 0.0, None)
    if w.size:
        w[w < ZERO_EIG_RTOL * w[-1]] = 0.0
    return HermitianEig(eigenvalues=w, eigenvectors=eig.eigenvectors)


def sqrtm_psd(H: npt.ArrayLike) -> np.ndarray:
    """Principal square root of a Hermitian positive semidefinite matrix."""
    arr = np.asarray(H)
    eig = psd_spectrum(arr)
    V = eig.eigenvectors
    root = (V * np.sqrt(eig.eigenvalues)) @ V.conj().T
    if not np.iscomplexobj(arr):
        return np.asarray(root.real)
    return 0.5 * (root + root.conj().T)


def pinv(M: npt.ArrayLike, tol: float = SVD_ZERO_RTOL) -> np.ndarray:
    """Moore-Penrose inverse; singular values below tol * S_max are treated as zero."""
    if tol < 0:
        raise ContractError("pinv tolerance must be non-negative")
    arr = np.asarray(M)
    U, S, V = svd(arr, full=False)
    keep = rank_of(S, tol) if tol > 0 else int(np.count_nonzero(S))
    inv = (V[:, :keep] / S[:keep]) @ U[:, :keep].conj().T
    if not np.iscomplexobj(arr):
        return np.asarray(inv.real)
    return inv


def chi2_cdf(x: float, dof: int) -> float:
    """Chi-squared CDF as the regularized lower incomplete gamma P(dof/2, x/2)."""
    if x < 0:
        raise ContractError("chi-squared argument must be non-negative")
    if dof < 1:
        raise ContractError("chi-squared needs dof >= 1")
    if np.isinf(x):
        return 1.0
    return float(special.gammainc(dof / 2.0, x / 2.0))


def chi2_sf(x: float, dof: int) -> float:
    """Upper tail 1 - chi2_cdf, evaluated without cancellation."""
    if x < 0:
        raise ContractError("chi-squared argument must be non-negative")
    if dof < 1:
        raise ContractError("chi-squared needs dof >= 1")
    if np.isinf(x):
        return 0.0
    return float(special.gammaincc(dof / 2.0, x / 2.0))
