"""Protocol commands — completeness report and loss bounds."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import TYPE_CHECKING, Any, Optional

import click

from engines import lossdist, protocol
from exceptions import ContractError
from models import PolyhedronKind
from ui import terminal as ui
from utils.export import json_text, protocol_to_dict, write_json

if TYPE_CHECKING:
    from app import AppContext

logger = logging.getLogger(__name__)


def protocol_report(app: AppContext, kind: PolyhedronKind, qubits: int) -> dict[str, Any]:
    p = app.protocol(kind, qubits)
    check = protocol.completeness(p)
    unity = protocol.unity_decomposition(p)
    adequacy = []
    for r in range(1, p.s + 1):
        dof = protocol.adequacy_possible(p, r)
        adequacy.append({"r": r, "dof": dof.dof, "testable": dof.redundant})
    return {
        "label": p.label,
        "qubits": p.qubits,
        "m": p.m,
        "s": p.s,
        "q": check.q,
        "complete": check.complete,
        "unity_intensity": unity.intensity,
        "unity_residual": unity.residual,
        "singular_values": check.singulars.tolist(),
        "adequacy": adequacy,
    }


def run_protocol(
    app: AppContext, kind: PolyhedronKind, qubits: int, out: Optional[Path] = None
) -> dict[str, Any]:
    """Print the protocol report as JSON; `out` also saves the instrumental matrix."""
    report = protocol_report(app, kind, qubits)
    ui.show_protocol_report(report)
    if out is not None:
        path = write_json(out, protocol_to_dict(app.protocol(kind, qubits)))
        ui.show_success(f"Instrumental matrix written to {path}")
    click.echo(json_text(report), nl=False)
    return report


def bounds_report(qubits: int, r: int) -> dict[str, Any]:
    if qubits < 1:
        raise ContractError("qubits must be >= 1")
    s = 2**qubits
    optimal = lossdist.optimal_min_loss(s, r)
    mixed = lossdist.polyhedron_mixed_min(qubits)
    return {
        "qubits": qubits,
        "s": s,
        "r": r,
        "optimal_min": optimal,
        "polyhedron_mixed_min": mixed,
        "ratio": mixed / optimal,
    }


def run_bounds(qubits: int, r: int) -> dict[str, Any]:
    report = bounds_report(qubits, r)
    ui.show_bounds(report)
    click.echo(json_text(report), nl=False)
    return report
