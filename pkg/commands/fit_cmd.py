"""Data commands — simulate counts, reconstruct a state, test model adequacy."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import TYPE_CHECKING, Any, Optional

import click

from engines import adequacy, protocol, reconstruct, simulate, states
from models import CountRecord, InstrumentalMatrix, MleOptions, PolyhedronKind, StateSpec
from ui import terminal as ui
from utils.data_loader import load_counts, load_protocol, load_state
from utils.export import (
    adequacy_to_dict,
    counts_csv,
    json_text,
    result_to_dict,
    state_to_dict,
    write_json,
    write_text,
)

if TYPE_CHECKING:
    from app import AppContext

logger = logging.getLogger(__name__)


def _protocol(
    app: AppContext, kind: PolyhedronKind, qubits: int, protocol_file: Optional[Path]
) -> InstrumentalMatrix:
    """A saved instrumental matrix replaces the catalog protocol when given."""
    if protocol_file is None:
        return app.protocol(kind, qubits)
    p = load_protocol(protocol_file)
    logger.info("Using protocol %s from %s", p.label or "?", protocol_file)
    return p


def run_simulate(
    app: AppContext,
    kind: PolyhedronKind,
    qubits: int,
    state: StateSpec,
    sample_size: float,
    out: Optional[Path] = None,
    state_out: Optional[Path] = None,
    expected: bool = False,
) -> CountRecord:
    """Write a count record for a named state; `expected` skips Poisson sampling.

    The lambda_hat column holds the true intensities tr(Λ_j ρ).
    """
    rho = states.named_state(state, qubits, seed=app.seed)
    p = protocol.set_times_for_sample(app.protocol(kind, qubits), rho, sample_size)
    if expected:
        record = CountRecord(
            counts=simulate.expected_counts(p, rho), times=p.times, label=p.label
        )
    else:
        record = simulate.simulate_counts(p, rho, app.seed)

    path = app.output_path(out, f"counts_{kind.label}_{qubits}.csv")
    write_text(path, counts_csv(record, protocol.intensities(p, rho)))
    if state_out is not None:
        write_json(state_out, state_to_dict(rho))
    ui.show_success(f"{record.counts.size} rows, {record.total:.0f} counts written to {path}")
    return record


def run_reconstruct(
    app: AppContext,
    kind: PolyhedronKind,
    qubits: int,
    counts_path: Path,
    rank: Optional[int] = None,
    alpha: Optional[float] = None,
    truth_path: Optional[Path] = None,
    out: Optional[Path] = None,
    protocol_file: Optional[Path] = None,
) -> dict[str, Any]:
    """Fit a fixed rank, or the smallest adequate rank when `rank` is None."""
    p = _protocol(app, kind, qubits, protocol_file)
    record = load_counts(counts_path)
    opts = MleOptions(seed=app.seed) if alpha is None else MleOptions(seed=app.seed, alpha=alpha)

    selection: dict[str, Any] = {}
    if rank is None:
        chosen = reconstruct.reconstruct_auto(p, record, opts)
        result = chosen.result
        selection = {
            "selected_rank": chosen.rank,
            "adequate": chosen.adequate,
            "candidates": [
                {
                    "r": cand.rank,
                    "loglik": cand.result.loglik,
                    "adequacy": adequacy_to_dict(cand.report) if cand.report else None,
                }
                for cand in chosen.candidates
            ],
        }
    else:
        result = reconstruct.mle(p, record, rank, opts)

    truth_fidelity = None
    if truth_path is not None:
        truth_fidelity = states.fidelity(load_state(truth_path), result.rho_hat)

    report = {**result_to_dict(result, truth_fidelity), **selection}
    path = write_json(app.output_path(out, f"{counts_path.stem}_mle.json"), report)
    status = "converged" if result.converged else "did not converge"
    ui.show_success(f"Rank {result.rank} fit {status} in {result.iterations} iterations: {path}")
    if truth_fidelity is not None:
        ui.show_info(f"Fidelity with the true state: {truth_fidelity:.12f}")
    return report


def run_adequacy(
    app: AppContext,
    kind: PolyhedronKind,
    qubits: int,
    counts_path: Path,
    rank: int,
    alpha: float,
    protocol_file: Optional[Path] = None,
) -> dict[str, Any]:
    """Fit rank `rank` and print the chi-squared adequacy report as JSON."""
    p = _protocol(app, kind, qubits, protocol_file)
    record = load_counts(counts_path)
    result = reconstruct.mle(p, record, rank, MleOptions(seed=app.seed, alpha=alpha))
    report = adequacy_to_dict(adequacy.adequacy_test(p, record, result, alpha))
    verdict = "adequate" if report["adequate"] else "rejected"
    ui.show_info(f"Rank {rank}: chi2 = {report['statistic']}, dof = {report['dof']}, {verdict}")
    click.echo(json_text(report), nl=False)
    return report
