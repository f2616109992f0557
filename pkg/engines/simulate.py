"""Simulation engine — Poisson count records and seeded Monte Carlo batches."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor, as_completed
from typing import Callable, Optional

import numpy as np

from engines import protocol, reconstruct, states
from exceptions import ContractError, PolytomoError
from models import (
    BatchRun,
    CountRecord,
    DensityMatrix,
    InstrumentalMatrix,
    MleOptions,
    RealVector,
)

logger = logging.getLogger(__name__)

ProgressHook = Callable[[int], None]


def child_seed(seed: int, index: int) -> int:
    """Seed of run `index`, a function of (seed, index) only."""
    ss = np.random.SeedSequence(seed, spawn_key=(index,))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def expected_counts(p: InstrumentalMatrix, rho: DensityMatrix) -> RealVector:
    """λ_j t_j, no sampling."""
    return protocol.intensities(p, rho) * p.times


def simulate_counts(p: InstrumentalMatrix, rho: DensityMatrix, seed: int) -> CountRecord:
    """k_j ~ Poisson(λ_j t_j), independent rows."""
    mean = expected_counts(p, rho)
    if not np.all(np.isfinite(mean)):
        raise ContractError("expected counts are not finite")
    counts = np.random.default_rng(seed).poisson(mean)
    return CountRecord(counts=counts.astype(float), times=p.times, label=p.label, seed=seed)


def _single_run(
    p: InstrumentalMatrix,
    rho: DensityMatrix,
    r: int,
    index: int,
    seed: int,
    opts: Optional[MleOptions],
) -> BatchRun:
    """One experiment: sample, reconstruct, score. Failures are recorded, not raised."""
    record = simulate_counts(p, rho, seed)
    try:
        result = reconstruct.mle(p, record, r, opts)
        truth = states.purify(rho, states.infer_rank(rho))
        loss = 1.0 - states.uhlmann_fidelity(truth, result.c_hat)
    except PolytomoError as exc:
        logger.warning("Run %d failed: %s", index, exc)
        return BatchRun(index=index, record=record, error=str(exc))
    if not result.converged:
        logger.warning("Run %d: reconstruction did not converge", index)
    return BatchRun(index=index, record=record, result=result, loss=loss)


def run_batch(
    p: InstrumentalMatrix,
    rho: DensityMatrix,
    r: int,
    n: float,
    runs: int,
    seed: int,
    workers: int = 1,
    opts: Optional[MleOptions] = None,
    progress: Optional[ProgressHook] = None,
) -> list[BatchRun]:
    """Independent experiments of expected size n, ordered by run index.

    Run i draws from child_seed(seed, i), so the output does not depend on
    the number of workers or on scheduling.
    """
    if runs < 1:
        raise ContractError("runs must be >= 1")
    p_n = protocol.set_times_for_sample(p, rho, n)
    seeds = [child_seed(seed, i) for i in range(runs)]
    logger.info("Batch of %d runs on %s (n=%g, r=%d, workers=%d)", runs, p.label, n, r, workers)

    out: list[Optional[BatchRun]] = [None] * runs
    if workers <= 1:
        for i, s in enumerate(seeds):
            out[i] = _single_run(p_n, rho, r, i, s, opts)
            if progress:
                progress(i)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {
                pool.submit(_single_run, p_n, rho, r, i, s, opts): i
                for i, s in enumerate(seeds)
            }
            for fut in as_completed(futures):
                i = futures[fut]
                out[i] = fut.result()
                if progress:
                    progress(i)

    runs_done = [run for run in out if run is not None]
    failed = sum(1 for run in runs_done if not run.ok)
    logger.info("Batch finished: %d ok, %d failed", len(runs_done) - failed, failed)
    return runs_done
