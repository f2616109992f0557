"""Distribution commands — loss coefficients and Monte Carlo experiments."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import TYPE_CHECKING, Any, Optional

import click
import numpy as np
from scipy import stats

from engines import adequacy, lossdist, numerics, protocol, simulate, states
from exceptions import PolytomoError
from models import (
    BatchRun,
    DensityMatrix,
    ExperimentConfig,
    InstrumentalMatrix,
    LossCoefficients,
    MleOptions,
    PolyhedronKind,
    StateSpec,
)
from ui import terminal as ui
from utils.data_loader import DataLoader
from utils.export import (
    coefficients_csv,
    csv_text,
    distribution_test_to_dict,
    json_text,
    write_json,
    write_text,
)

if TYPE_CHECKING:
    from app import AppContext

logger = logging.getLogger(__name__)

MC_HEADER = ("run", "one_minus_f", "z", "chi2", "chi2_p", "converged")


def coefficients_for(
    p: InstrumentalMatrix, rho: DensityMatrix, spec: StateSpec, rank: int, n: float
) -> LossCoefficients:
    """d for a named state; the maximally mixed state uses the singular-value form."""
    if spec.kind == "white-noise-mix" and spec.f == 1.0 and rank == p.s:
        return lossdist.white_noise_coefficients(p, n)
    return lossdist.loss_coefficients(p, rho, rank, n)


def run_losscoef(
    app: AppContext,
    kind: PolyhedronKind,
    qubits: int,
    state: StateSpec,
    sample_size: float,
    rank: Optional[int] = None,
    out: Optional[Path] = None,
) -> dict[str, Any]:
    """Write the d-vector CSV and print the distribution summary as JSON."""
    p = app.protocol(kind, qubits)
    rho = states.named_state(state, qubits, seed=app.seed)
    r = rank if rank is not None else states.infer_rank(rho)
    d = coefficients_for(p, rho, state, r, sample_size)

    csv_path = app.output_path(out, f"losscoef_{kind.label}_{qubits}.csv")
    write_text(csv_path, coefficients_csv(d))
    summary = {"label": p.label, "state": state.kind, **lossdist.loss_summary(d, True)}
    write_json(csv_path.with_suffix(".json"), summary)
    ui.show_summary(f"{p.label} loss distribution", summary)
    click.echo(json_text(summary), nl=False)
    return summary


# ── Monte Carlo ───────────────────────────────────────────────

def _run_row(run: BatchRun, dof: int) -> tuple[Any, ...]:
    """CSV row of one successful run; chi2_p is blank when the test has no dof."""
    assert run.result is not None and run.loss is not None
    fid = min(1.0, max(0.0, 1.0 - run.loss))
    chi2 = adequacy.chi2_statistic(run.record, run.result.lambda_hat)
    chi2_p = numerics.chi2_sf(chi2, dof) if dof > 0 else ""
    converged = int(run.result.converged)
    return (run.index, float(run.loss), lossdist.nines(fid), chi2, chi2_p, converged)


def _theory(
    cfg: ExperimentConfig, p: InstrumentalMatrix, rho: DensityMatrix
) -> Optional[LossCoefficients]:
    try:
        return coefficients_for(p, rho, cfg.state, cfg.rank, cfg.sample_size)
    except PolytomoError as exc:
        logger.warning("No theoretical distribution for this setup: %s", exc)
        return None


def _header(name: str, cfg: ExperimentConfig, p: InstrumentalMatrix) -> dict[str, Any]:
    return {
        "experiment": name,
        "protocol": p.label,
        "qubits": cfg.qubits,
        "state": {"kind": cfg.state.kind, "f": cfg.state.f, "seed": cfg.state.seed},
        "rank": cfg.rank,
        "sample_size": cfg.sample_size,
        "seed": cfg.seed,
    }


def run_mc(
    app: AppContext,
    config: str,
    overrides: Optional[dict[str, Any]] = None,
) -> dict[str, Any]:
    """Run an experiment config: per-run CSV plus a JSON summary against theory.

    With `theory_only` the CSV holds draws of the number of nines from the
    theoretical distribution instead of simulated runs.
    """
    loader = DataLoader()
    name = Path(config).stem
    cfg = loader.load_experiment(config, {**app.overrides, **(overrides or {})})
    p = app.protocol(cfg.polyhedron, cfg.qubits)
    rho = states.named_state(cfg.state, cfg.qubits, seed=cfg.seed)
    csv_path = app.output_path(cfg.csv_out, f"mc_{name}.csv")
    json_path = app.output_path(cfg.json_out, f"mc_{name}.json")
    summary = _header(name, cfg, p)

    d = _theory(cfg, p, rho)
    summary["theory"] = lossdist.loss_summary(d, True) if d is not None else None

    if cfg.theory_only:
        if d is None:
            raise PolytomoError("theory-only run needs loss coefficients for this state")
        z = lossdist.sample_nines(d, cfg.theory_draws, cfg.seed)
        write_text(csv_path, csv_text(("draw", "z"), ((i, float(v)) for i, v in enumerate(z))))
        summary["draws"] = cfg.theory_draws
        summary["mean_z"] = float(np.mean(z))
    else:
        with ui.progress_bar(f"mc {name}", cfg.runs) as advance:
            runs = simulate.run_batch(
                p, rho, cfg.rank, cfg.sample_size, cfg.runs, cfg.seed,
                workers=cfg.workers, opts=MleOptions(seed=cfg.seed), progress=advance,
            )
        ok = [run for run in runs if run.ok]
        dof = protocol.adequacy_possible(p, cfg.rank).dof
        rows = [_run_row(run, dof) for run in ok]
        write_text(csv_path, csv_text(MC_HEADER, rows))

        losses = np.array([row[1] for row in rows])
        summary["runs"] = cfg.runs
        summary["failed"] = len(runs) - len(ok)
        summary["empirical"] = _empirical(losses, np.array([row[2] for row in rows]))
        summary["distribution_test"] = (
            distribution_test_to_dict(lossdist.distribution_test(losses, d, seed=cfg.seed))
            if d is not None and losses.size >= 2 else None
        )

    write_json(json_path, summary)
    ui.show_summary(f"experiment {name}", summary)
    ui.show_success(f"Results written to {csv_path} and {json_path}")
    click.echo(json_text(summary), nl=False)
    return summary


def _empirical(losses: np.ndarray, z: np.ndarray) -> Optional[dict[str, Optional[float]]]:
    """Sample moments of the loss; skewness and excess are None below four runs."""
    if losses.size == 0:
        return None
    finite = z[np.isfinite(z)]
    shaped = losses.size >= 4 and float(np.ptp(losses)) > 0.0
    return {
        "mean": float(losses.mean()),
        "variance": float(losses.var(ddof=1)) if losses.size > 1 else 0.0,
        "skewness": float(stats.skew(losses, bias=False)) if shaped else None,
        "excess": float(stats.kurtosis(losses, fisher=True, bias=False)) if shaped else None,
        "mean_z": float(finite.mean()) if finite.size else float("inf"),
    }
