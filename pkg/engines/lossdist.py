"""Fidelity-loss distribution engine.

Asymptotically 1 - F is distributed as Σ_j d_j ξ_j^2 with ξ_j standard
normal. The coefficients are the eigenvalues of Σ^1/2 A Σ^1/2, where Σ is
the asymptotic covariance of the purification coordinates and A is half the
Hessian of 1 - F at the true state, both restricted to the coordinates that
are neither gauge (c -> c U) nor normalization (c -> (1 + ε) c).

Real coordinates of a purification perturbation δ (s x r) are
θ = (Re δ.ravel(), Im δ.ravel()).
"""

from __future__ import annotations

import logging
import math
from typing import Any, Optional, Union

import numpy as np
import numpy.typing as npt
from scipy import linalg, stats

from config import (
    BOUNDARY_RTOL,
    GOF_BINS,
    GOF_THEORY_DRAWS,
    HESSIAN_CHUNK,
    HESSIAN_STEP,
    SAMPLE_CHUNK,
)
from engines import numerics, protocol, states
from exceptions import (
    AmbiguityError,
    BoundaryStateError,
    ContractError,
    DimensionError,
    IncompleteProtocolError,
    NumericError,
    RankDeficitError,
    UndefinedMomentError,
)
from models import (
    DensityMatrix,
    DistributionTest,
    InstrumentalMatrix,
    LossCoefficients,
    Purification,
    RealVector,
)

logger = logging.getLogger(__name__)

Coefficients = Union[LossCoefficients, npt.ArrayLike]


# ── Coordinates ──────────────────────────────────────────────

def _real(Z: np.ndarray) -> np.ndarray:
    return np.concatenate([Z.real.ravel(), Z.imag.ravel()])


def _complex(v: np.ndarray, s: int, r: int) -> np.ndarray:
    sr = s * r
    return (v[..., :sr] + 1j * v[..., sr:]).reshape(v.shape[:-1] + (s, r))


def _hermitian_basis(r: int) -> list[np.ndarray]:
    basis = []
    for a in range(r):
        for b in range(r):
            H = np.zeros((r, r), dtype=complex)
            if a == b:
                H[a, a] = 1.0
            elif a < b:
                H[a, b] = H[b, a] = 1.0 / math.sqrt(2.0)
            else:
                H[a, b] = 1j / math.sqrt(2.0)
                H[b, a] = -1j / math.sqrt(2.0)
            basis.append(H)
    return basis


def _gauge_directions(c0: np.ndarray) -> np.ndarray:
    """Tangents c0 (iH) of the right-unitary gauge orbit, one column per Hermitian H."""
    r = c0.shape[1]
    return np.column_stack([_real(c0 @ (1j * H)) for H in _hermitian_basis(r)])


# ── Covariance ───────────────────────────────────────────────

def _fisher(X: np.ndarray, t: np.ndarray, c0: np.ndarray) -> np.ndarray:
    """Poisson information Σ_j (t_j / λ_j) ∇λ_j ∇λ_j^T in θ coordinates."""
    m, s = X.shape
    r = c0.shape[1]
    W = X @ c0
    lam = np.sum(np.abs(W) ** 2, axis=1)
    if np.any(lam <= BOUNDARY_RTOL * lam.max()):
        raise BoundaryStateError(
            f"{int(np.count_nonzero(lam <= BOUNDARY_RTOL * lam.max()))} protocol rows "
            "have zero intensity at the true state"
        )
    G = X[:, :, None] * W.conj()[:, None, :]
    D = np.hstack([2.0 * G.real.reshape(m, s * r), -2.0 * G.imag.reshape(m, s * r)])
    return np.asarray(D.T @ (D * (t / lam)[:, None]))


def _projected_covariance(
    X: np.ndarray, t: np.ndarray, c0: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Basis Q of the physical coordinates and the covariance Σ_q expressed in it.

    The information is inverted on the complement of the gauge directions;
    the normalization direction is projected out afterwards.
    """
    info = _fisher(X, t, c0)
    gauge = _gauge_directions(c0)
    radial = _real(c0)[:, None]
    N = linalg.null_space(gauge.T)
    try:
        cov_n = linalg.inv(N.T @ info @ N, check_finite=False)
    except linalg.LinAlgError as exc:
        raise NumericError("Fisher information is singular off the gauge orbit") from exc
    cov = N @ cov_n @ N.T
    Q = linalg.null_space(np.hstack([gauge, radial]).T)
    sigma = Q.T @ cov @ Q
    return Q, 0.5 * (sigma + sigma.T)


# ── Fidelity curvature ───────────────────────────────────────

def pure_fidelity_hessian(c0: Purification) -> np.ndarray:
    """Half Hessian of 1 - F for a pure state: the real form of E - c0 c0^dagger."""
    if c0.r != 1:
        raise ContractError("closed-form curvature needs a pure state")
    v = c0.c[:, 0]
    P = np.eye(c0.s) - np.outer(v, v.conj())
    return np.block([[P.real, -P.imag], [P.imag, P.real]])


def _loss_batch(c0: np.ndarray, points: np.ndarray) -> np.ndarray:
    overlap = np.einsum("ai,nak->nik", c0.conj(), points)
    nuclear = np.linalg.svd(overlap, compute_uv=False).sum(axis=-1)
    norms = np.sum(np.abs(points) ** 2, axis=(1, 2)) * np.sum(np.abs(c0) ** 2)
    return 1.0 - nuclear**2 / norms


def fidelity_hessian(
    c0: Purification, basis: Optional[np.ndarray] = None, step: float = HESSIAN_STEP
) -> np.ndarray:
    """Half Hessian of 1 - F at c0 by central differences along the columns of `basis`."""
    c = np.asarray(c0.c)
    s, r = c.shape
    B = np.eye(2 * s * r) if basis is None else np.asarray(basis, dtype=float)
    if B.shape[0] != 2 * s * r:
        raise DimensionError(f"basis needs {2 * s * r} rows, got {B.shape[0]}")
    h = step * float(np.linalg.norm(c))
    E = _complex(B.T, s, r) * h            # (k, s, r)
    k = E.shape[0]
    iu, ju = np.triu_indices(k)
    H = np.zeros((k, k))
    pairs = max(1, HESSIAN_CHUNK // 4)
    for start in range(0, len(iu), pairs):
        i, j = iu[start:start + pairs], ju[start:start + pairs]
        Ei, Ej = E[i], E[j]
        pts = np.concatenate([c + Ei + Ej, c + Ei - Ej, c - Ei + Ej, c - Ei - Ej])
        f = _loss_batch(c, pts).reshape(4, -1)
        H[i, j] = (f[0] - f[1] - f[2] + f[3]) / (4.0 * h * h)
    H = H + np.triu(H, 1).T
    return 0.5 * H


# ── Coefficients ─────────────────────────────────────────────

def _coefficients_from(sigma: np.ndarray, curvature: np.ndarray) -> np.ndarray:
    root = numerics.sqrtm_psd(sigma)
    K = root @ curvature @ root
    return numerics.eigh(0.5 * (K + K.T)).eigenvalues[::-1]


def loss_coefficients(
    p: InstrumentalMatrix, rho0: DensityMatrix, r: int, n: float
) -> LossCoefficients:
    """Coefficient vector d of the asymptotic fidelity-loss distribution at sample size n."""
    if rho0.s != p.s:
        raise DimensionError(f"state dimension {rho0.s} != protocol dimension {p.s}")
    present = states.infer_rank(rho0)
    if present != r:
        raise RankDeficitError(
            f"rank mismatch: state has rank {present} but r={r}; "
            "loss coefficients need a state of exactly rank r"
        )
    check = protocol.completeness(p)
    if not check.complete:
        raise IncompleteProtocolError(check.q, p.s * p.s)

    c0 = states.purify(rho0, r)
    p_n = protocol.set_times_for_sample(p, rho0, n)
    Q, sigma = _projected_covariance(p_n.X, p_n.times, c0.c)
    if r == 1:
        curvature = Q.T @ pure_fidelity_hessian(c0) @ Q
    else:
        curvature = fidelity_hessian(c0, basis=Q)
    d = _coefficients_from(sigma, 0.5 * (curvature + curvature.T))
    logger.debug("%s: %d coefficients, n*sum(d) = %.10g", p.label, d.size, n * d.sum())
    return LossCoefficients(d=d, n=float(n), s=p.s, r=r)


def pure_state_loss(p: InstrumentalMatrix, psi: npt.ArrayLike, n: float = 1.0) -> float:
    """Scaled loss L for a pure state vector (need not be normalized)."""
    v = np.asarray(psi, dtype=complex).reshape(-1)
    if v.shape != (p.s,):
        raise DimensionError(f"state vector needs length {p.s}")
    v = v / np.linalg.norm(v)
    c0 = v[:, None]
    lam = np.abs(p.X @ v) ** 2
    t = p.times * (n / float(np.dot(lam, p.times)))
    Q, sigma = _projected_covariance(p.X, t, c0)
    P = np.eye(p.s) - np.outer(v, v.conj())
    A = np.block([[P.real, -P.imag], [P.imag, P.real]])
    return n * float(np.trace(Q.T @ A @ Q @ sigma))


def white_noise_coefficients(p: InstrumentalMatrix, n: float) -> LossCoefficients:
    """Coefficients at the maximally mixed state from the singular values of B (unit times)."""
    _, S, _ = numerics.svd(protocol.measurement_matrix(p, unit_times=True).B, full=False)
    q = numerics.rank_of(S)
    if q < p.s * p.s:
        raise IncompleteProtocolError(q, p.s * p.s)
    if S[0] - S[1] <= 1e-9 * S[0]:
        raise AmbiguityError("largest singular value of B is degenerate")
    b = S[1:p.s * p.s]
    d = p.m / (4.0 * p.s * n * b**2)
    return LossCoefficients(d=d, n=float(n), s=p.s, r=p.s)


# ── Moments and bounds ───────────────────────────────────────

def _vector(d: Coefficients) -> RealVector:
    arr = d.d if isinstance(d, LossCoefficients) else np.asarray(d, dtype=float).reshape(-1)
    if np.any(arr < 0):
        raise ContractError("loss coefficients must be non-negative")
    return arr


def mean_loss(d: Coefficients) -> float:
    return float(_vector(d).sum())


def variance_loss(d: Coefficients) -> float:
    return float(2.0 * np.sum(_vector(d) ** 2))


def _sigma(d: RealVector) -> float:
    sigma = math.sqrt(2.0 * float(np.sum(d**2)))
    if sigma == 0.0:
        raise UndefinedMomentError("distribution has zero variance")
    return sigma


def skewness(d: Coefficients) -> float:
    vec = _vector(d)
    return float(8.0 * np.sum(vec**3) / _sigma(vec) ** 3)


def excess(d: Coefficients) -> float:
    vec = _vector(d)
    return float(48.0 * np.sum(vec**4) / _sigma(vec) ** 4)


def scaled_loss(d: Coefficients, n: Optional[float] = None) -> float:
    """L = n Σ d_j, independent of the sample size."""
    if n is None:
        if not isinstance(d, LossCoefficients):
            raise ContractError("sample size is required for a bare coefficient vector")
        n = d.n
    return float(n * _vector(d).sum())


def optimal_min_loss(s: int, r: int) -> float:
    """ν^2 / (4 (s - 1)) with ν = (2s - r) r - 1."""
    if s < 2 or not 1 <= r <= s:
        raise ContractError(f"need s >= 2 and 1 <= r <= s, got s={s}, r={r}")
    nu = (2 * s - r) * r - 1
    return nu * nu / (4.0 * (s - 1))


def polyhedron_mixed_min(l: int) -> float:
    """Loss of any polyhedron protocol power at the maximally mixed state."""
    if l < 1:
        raise ContractError("qubits must be >= 1")
    return (10**l - 1) / 4.0


def nines(F: float) -> float:
    """z = -log10(1 - F); infinite at F = 1."""
    if not 0.0 <= F <= 1.0:
        raise ContractError(f"fidelity {F} outside [0, 1]")
    if F == 1.0:
        return math.inf
    return -math.log10(1.0 - F)


# ── Sampling ─────────────────────────────────────────────────

def sample_loss(d: Coefficients, count: int, seed: int) -> RealVector:
    """Draws of Σ d_j ξ_j^2."""
    if count < 1:
        raise ContractError("count must be >= 1")
    vec = _vector(d)
    rng = np.random.default_rng(seed)
    out = np.empty(count)
    for start in range(0, count, SAMPLE_CHUNK):
        size = min(SAMPLE_CHUNK, count - start)
        xi = rng.standard_normal((size, vec.size))
        out[start:start + size] = (xi * xi) @ vec
    return out


def sample_nines(d: Coefficients, count: int, seed: int) -> RealVector:
    """Theoretical draws of z = -log10(1 - F)."""
    losses = sample_loss(d, count, seed)
    with np.errstate(divide="ignore"):
        return np.asarray(-np.log10(losses))


def loss_summary(d: LossCoefficients, polyhedron_power: bool = False) -> dict[str, Any]:
    """JSON-ready moments and bounds; undefined moments are None."""
    try:
        skew: Optional[float] = skewness(d)
        kurt: Optional[float] = excess(d)
    except UndefinedMomentError:
        skew = kurt = None
    bounds: dict[str, float] = {"optimal_min": optimal_min_loss(d.s, d.r)}
    if polyhedron_power and d.r == d.s:
        bounds["polyhedron_mixed_min"] = polyhedron_mixed_min(int(round(math.log2(d.s))))
    return {
        "L": scaled_loss(d),
        "mean": mean_loss(d),
        "variance": variance_loss(d),
        "skewness": skew,
        "excess": kurt,
        "j_max": d.j_max,
        "n": d.n,
        "s": d.s,
        "r": d.r,
        "bounds": bounds,
    }


def distribution_test(
    losses: npt.ArrayLike,
    d: Coefficients,
    seed: int = 0,
    bins: int = GOF_BINS,
    draws: int = GOF_THEORY_DRAWS,
) -> DistributionTest:
    """Empirical losses against theoretical draws: two-sample KS and binned Pearson chi-squared.

    Bins are equiprobable under the theoretical distribution.
    """
    sample = np.asarray(losses, dtype=float)
    if sample.size < 1:
        raise ContractError("need at least one empirical loss")
    if bins < 2:
        raise ContractError("need at least two bins")
    theory = sample_loss(d, draws, seed)
    ks = stats.ks_2samp(sample, theory)
    edges = np.quantile(theory, np.linspace(0.0, 1.0, bins + 1)[1:-1])
    observed = np.bincount(np.searchsorted(edges, sample, side="right"), minlength=bins)
    expected = sample.size / bins
    chi2 = float(np.sum((observed - expected) ** 2) / expected)
    return DistributionTest(
        ks_statistic=float(ks.statistic),
        ks_p_value=float(ks.pvalue),
        chi2_statistic=chi2,
        chi2_dof=bins - 1,
        chi2_p_value=numerics.chi2_sf(chi2, bins - 1),
    )
