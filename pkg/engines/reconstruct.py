"""Reconstruction engine — SVD zero approximation and likelihood maximization.

The likelihood is maximized over a purification c (s x r, ρ ∝ c c^dagger).
Its stationarity condition is I c = J(c) c with I = Σ t_j Λ_j and
J(c) = Σ (k_j / λ_j) Λ_j. The iteration is the damped fixed point
c <- (1 - α) c + α I^-1 J(c) c; undamped, the radial direction has
eigenvalue -1 and the iterate oscillates in scale.
"""

from __future__ import annotations

import logging
from typing import Optional

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from config import (
    INTENSITY_FLOOR,
    MLE_ASCENT_SLACK,
    MLE_MIN_STEP,
    START_PERTURBATION,
)
from engines import adequacy, numerics, protocol
from exceptions import (
    ContractError,
    DegenerateStateError,
    DimensionError,
    IncompleteProtocolError,
    NotTestableError,
    NumericError,
)
from models import (
    CountRecord,
    DensityMatrix,
    InstrumentalMatrix,
    MleOptions,
    Purification,
    RankCandidate,
    RankSelection,
    ReconstructionResult,
)

logger = logging.getLogger(__name__)


def _with_record_times(p: InstrumentalMatrix, rec: CountRecord) -> InstrumentalMatrix:
    if rec.counts.shape != (p.m,):
        raise DimensionError(f"record has {rec.counts.size} rows, protocol {p.m}")
    return protocol.with_times(p, rec.times)


def pseudo_inverse_estimate(p: InstrumentalMatrix, rec: CountRecord) -> DensityMatrix:
    """Linear inversion B vec(ρ) = K, then projection onto physical states."""
    p_t = _with_record_times(p, rec)
    B = protocol.measurement_matrix(p_t).B
    U, S, V = numerics.svd(B, full=False)
    q = numerics.rank_of(S)
    if q < p.s * p.s:
        raise IncompleteProtocolError(q, p.s * p.s)
    Q = U.conj().T @ rec.counts
    f = Q / S
    rho = protocol.devec(V @ f, p.s)
    rho = 0.5 * (rho + rho.conj().T)

    eig = numerics.eigh(rho)
    w = np.clip(eig.eigenvalues, 0.0, None)
    if w.sum() <= 0:
        raise DegenerateStateError("zero approximation has no positive eigenvalue")
    V_e = eig.eigenvectors
    rho = (V_e * (w / w.sum())) @ V_e.conj().T
    return DensityMatrix(0.5 * (rho + rho.conj().T))


def _start(rho: DensityMatrix, r: int, seed: int) -> np.ndarray:
    """Rank-r truncation of the zero approximation; zero columns get a small random kick."""
    eig = numerics.eigh(rho.rho)
    w = np.clip(eig.eigenvalues[::-1][:r], 0.0, None)
    c = eig.eigenvectors[:, ::-1][:, :r] * np.sqrt(w)
    scale = max(float(np.linalg.norm(c)), 1.0)
    rng = np.random.default_rng(seed)
    for col in range(r):
        if np.linalg.norm(c[:, col]) <= START_PERTURBATION * scale:
            kick = rng.standard_normal(rho.s) + 1j * rng.standard_normal(rho.s)
            c[:, col] = START_PERTURBATION * scale * kick / np.linalg.norm(kick)
    return c


def mle(
    p: InstrumentalMatrix,
    rec: CountRecord,
    r: int,
    opts: Optional[MleOptions] = None,
    start: Optional[Purification] = None,
) -> ReconstructionResult:
    """Maximum-likelihood purification of rank r for a count record."""
    opts = opts or MleOptions()
    p_t = _with_record_times(p, rec)
    if not 1 <= r <= p.s:
        raise ContractError(f"rank {r} outside [1, {p.s}]")
    X, t, k = p_t.X, p_t.times, rec.counts
    total = rec.total
    if total <= 0:
        raise DegenerateStateError("record has no counts")

    if start is None:
        c = _start(pseudo_inverse_estimate(p_t, rec), r, opts.seed)
    else:
        if start.s != p.s or start.r != r:
            raise DimensionError(f"start purification is {start.c.shape}, need ({p.s}, {r})")
        c = np.array(start.c)

    I = protocol.total_intensity_operator(p_t)
    try:
        factor = cho_factor(I)
    except LinAlgError as exc:
        raise NumericError("total intensity operator is singular") from exc
    c = c * np.sqrt(total / np.vdot(c, I @ c).real)
    floor = INTENSITY_FLOOR * total / p.m

    def expected(c_: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        W = X @ c_
        mu = t * np.sum(np.abs(W) ** 2, axis=1)
        return W, np.maximum(mu, floor)

    def loglik(mu: np.ndarray) -> float:
        return float(np.sum(k * np.log(mu) - mu))

    W, mu = expected(c)
    current = loglik(mu)
    trace = [current]
    alpha = opts.step
    change = np.inf
    residual = np.inf
    converged = False
    iteration = 0

    while iteration < opts.max_iter:
        Jc = X.conj().T @ ((k * t / mu)[:, None] * W)
        Ic = I @ c
        residual = float(np.linalg.norm(Ic - Jc) / np.linalg.norm(Ic))
        if residual <= opts.residual_tol and change <= opts.change_tol:
            converged = True
            break

        target = cho_solve(factor, Jc)
        iteration += 1
        while True:
            proposal = (1.0 - alpha) * c + alpha * target
            W_new, mu_new = expected(proposal)
            value = loglik(mu_new)
            if value >= current - MLE_ASCENT_SLACK * abs(current):
                break
            alpha /= 2.0
            logger.debug("Iteration %d: loglik fell, step halved to %g", iteration, alpha)
            if alpha < MLE_MIN_STEP:
                break
        if alpha < MLE_MIN_STEP:
            logger.warning("Step size underflow after %d iterations", iteration)
            break

        change = float(np.linalg.norm(proposal - c) / np.linalg.norm(c))
        c, W, mu, current = proposal, W_new, mu_new, value
        trace.append(current)
        alpha = opts.step

    if not converged:
        logger.warning(
            "MLE did not converge in %d iterations (residual %.3g, change %.3g)",
            iteration, residual, change,
        )

    lam = np.sum(np.abs(X @ c) ** 2, axis=1)
    lam = lam * (total / float(np.dot(lam, t)))
    c_hat = Purification(c / np.linalg.norm(c))
    logger.debug("MLE rank %d: %d iterations, loglik %.10g", r, iteration, current)
    return ReconstructionResult(
        c_hat=c_hat,
        rho_hat=c_hat.density(),
        loglik=current,
        iterations=iteration,
        converged=converged,
        gradient_norm=residual,
        lambda_hat=lam,
        loglik_trace=tuple(trace),
    )


def reconstruct_auto(
    p: InstrumentalMatrix, rec: CountRecord, opts: Optional[MleOptions] = None
) -> RankSelection:
    """Fit every candidate rank and keep the smallest one the adequacy test accepts."""
    opts = opts or MleOptions()
    ranks = sorted(opts.ranks) if opts.ranks else list(range(1, p.s + 1))
    candidates: list[RankCandidate] = []
    for r in ranks:
        result = mle(p, rec, r, opts)
        try:
            report = adequacy.adequacy_test(p, rec, result, opts.alpha)
        except NotTestableError:
            logger.debug("Rank %d is not testable", r)
            report = None
        candidates.append(RankCandidate(rank=r, result=result, report=report))

    for cand in candidates:
        if cand.report is not None and cand.report.adequate:
            logger.info("Selected rank %d (p = %.4g)", cand.rank, cand.report.p_value)
            return RankSelection(result=cand.result, adequate=True, candidates=tuple(candidates))
    logger.warning("No rank passed the adequacy test at alpha=%g", opts.alpha)
    return RankSelection(result=candidates[-1].result, adequate=False, candidates=tuple(candidates))
