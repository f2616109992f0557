"""Chi-squared adequacy test of a fitted model against count data."""

from __future__ import annotations

import logging

import numpy as np
import numpy.typing as npt

from config import DEFAULT_ALPHA, LOW_EXPECTATION, ZERO_EXPECTATION
from engines import numerics, protocol
from exceptions import ContractError, DimensionError, NotTestableError
from models import AdequacyReport, CountRecord, InstrumentalMatrix, ReconstructionResult

logger = logging.getLogger(__name__)


def chi2_statistic(rec: CountRecord, lambda_hat: npt.ArrayLike) -> float:
    """Σ (k_j - λ̂_j t_j)^2 / (λ̂_j t_j); inf when a row with counts has no expectation."""
    lam = np.asarray(lambda_hat, dtype=float)
    if lam.shape != rec.counts.shape:
        raise DimensionError("lambda_hat and counts differ in length")
    expected = lam * rec.times
    k = rec.counts
    empty = expected < ZERO_EXPECTATION
    if np.any(empty & (k > 0)):
        return float("inf")
    live = ~empty
    return float(np.sum((k[live] - expected[live]) ** 2 / expected[live]))


def adequacy_test(
    p: InstrumentalMatrix,
    rec: CountRecord,
    result: ReconstructionResult,
    alpha: float = DEFAULT_ALPHA,
) -> AdequacyReport:
    if not 0.0 < alpha < 1.0:
        raise ContractError("alpha must be in (0, 1)")
    check = protocol.adequacy_possible(p, result.rank)
    if not check.redundant:
        raise NotTestableError(
            f"{p.label} with rank {result.rank} has {check.dof} degrees of freedom"
        )
    statistic = chi2_statistic(rec, result.lambda_hat)
    p_value = numerics.chi2_sf(statistic, check.dof)
    low = int(np.count_nonzero(result.lambda_hat * rec.times < LOW_EXPECTATION))
    if low:
        logger.debug("%d rows have expected counts below %g", low, LOW_EXPECTATION)
    return AdequacyReport(
        statistic=statistic,
        dof=check.dof,
        p_value=p_value,
        adequate=p_value >= alpha,
        alpha=alpha,
        low_expectation_rows=low,
    )
