"""Scan commands — Bloch-sphere grid for one qubit, extremal search for more."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import TYPE_CHECKING, Any, Optional

import click

from config import DEFAULT_RESTARTS
from engines import scan
from models import PolyhedronKind
from ui import terminal as ui
from utils.export import (
    extremal_to_dict,
    grid_csv,
    grid_extremes_to_dict,
    json_text,
    write_json,
    write_text,
)

if TYPE_CHECKING:
    from app import AppContext

logger = logging.getLogger(__name__)


def run_scan(
    app: AppContext,
    kind: PolyhedronKind,
    resolution: float,
    out: Optional[Path] = None,
    refine: bool = True,
) -> dict[str, Any]:
    """Write the grid CSV to `out` and the extremes JSON next to it."""
    csv_path = app.output_path(out, f"scan_{kind.label}.csv")
    steps = max(1, round(180.0 / resolution))
    with ui.progress_bar(f"scan {kind.label}", steps) as advance:
        grid = scan.scan_bloch(kind, resolution, refine=refine, progress=advance)

    extremes = {"label": kind.label, "qubits": 1, **grid_extremes_to_dict(grid)}
    write_text(csv_path, grid_csv(grid))
    json_path = write_json(csv_path.with_suffix(".json"), extremes)
    ui.show_extremes(kind.label, grid.min, grid.max)
    ui.show_success(f"Grid written to {csv_path}, extremes to {json_path}")
    click.echo(json_text(extremes), nl=False)
    return extremes


def run_extremes(
    app: AppContext,
    kind: PolyhedronKind,
    qubits: int,
    restarts: Optional[int] = None,
    out: Optional[Path] = None,
) -> dict[str, Any]:
    """Multi-start search for the smallest and largest pure-state loss."""
    p = app.protocol(kind, qubits)
    budget = restarts if restarts is not None else DEFAULT_RESTARTS.get(qubits, 300)
    with ui.progress_bar(f"extremes {p.label}", budget) as advance:
        search = scan.extremal_loss(p, budget, seed=app.seed, workers=app.workers, progress=advance)

    report = {"label": p.label, "qubits": qubits, **extremal_to_dict(search)}
    json_path = write_json(app.output_path(out, f"extremes_{kind.label}_{qubits}.json"), report)
    ui.show_extremes(p.label, search.l_min, search.l_max, search.certified)
    ui.show_success(f"Extremes written to {json_path}")
    click.echo(json_text(report), nl=False)
    return report
