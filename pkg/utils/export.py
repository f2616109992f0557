"""Writers for the JSON and CSV files the CLI produces.

CSV files are UTF-8 with '\\n' line endings and 17 significant digits;
JSON keeps insertion order and stores complex numbers as [re, im] pairs.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

import numpy as np

from config import CSV_DIGITS
from exceptions import ExportError
from models import (
    AdequacyReport,
    CountRecord,
    DensityMatrix,
    DistributionTest,
    ExtremalSearch,
    InstrumentalMatrix,
    LossCoefficients,
    ReconstructionResult,
    SphereGrid,
)
from utils.data_loader import COUNTS_HEADER

logger = logging.getLogger(__name__)


def fmt(x: float) -> str:
    return f"{x:.{CSV_DIGITS}g}"


def finite_or_none(x: Optional[float]) -> Optional[float]:
    if x is None or not math.isfinite(x):
        return None
    return float(x)


def _pairs(z: np.ndarray) -> list[Any]:
    return np.stack([z.real, z.imag], axis=-1).tolist()


# ── Serializable forms ───────────────────────────────────────

def protocol_to_dict(p: InstrumentalMatrix) -> dict[str, Any]:
    rows = np.empty((p.m, 2 * p.s))
    rows[:, 0::2], rows[:, 1::2] = p.X.real, p.X.imag
    return {"label": p.label, "qubits": p.qubits, "times": p.times.tolist(), "rows": rows.tolist()}


def state_to_dict(rho: DensityMatrix) -> dict[str, Any]:
    return {"s": rho.s, "r": rho.rank, "entries": _pairs(rho.rho)}


def result_to_dict(
    result: ReconstructionResult, fidelity_vs_truth: Optional[float] = None
) -> dict[str, Any]:
    out: dict[str, Any] = {
        "rho_hat": _pairs(result.rho_hat.rho),
        "r": result.rank,
        "loglik": result.loglik,
        "iterations": result.iterations,
        "converged": result.converged,
        "gradient_norm": finite_or_none(result.gradient_norm),
    }
    if fidelity_vs_truth is not None:
        out["fidelity_vs_truth"] = fidelity_vs_truth
    return out


def adequacy_to_dict(report: AdequacyReport) -> dict[str, Any]:
    return {
        "statistic": finite_or_none(report.statistic),
        "dof": report.dof,
        "p_value": report.p_value,
        "adequate": report.adequate,
        "alpha": report.alpha,
        "low_expectation_rows": report.low_expectation_rows,
    }


def distribution_test_to_dict(test: DistributionTest) -> dict[str, Any]:
    return {
        "ks_statistic": test.ks_statistic,
        "ks_p_value": test.ks_p_value,
        "chi2_statistic": test.chi2_statistic,
        "chi2_dof": test.chi2_dof,
        "chi2_p_value": test.chi2_p_value,
    }


def _angles_deg(point: tuple[float, float]) -> dict[str, float]:
    return {"theta_deg": math.degrees(point[0]), "phi_deg": math.degrees(point[1])}


def grid_extremes_to_dict(grid: SphereGrid) -> dict[str, Any]:
    return {
        "L_min": grid.min,
        "L_max": grid.max,
        "argmin": _angles_deg(grid.argmin),
        "argmax": _angles_deg(grid.argmax),
        "theta_steps": grid.theta_steps,
        "phi_steps": grid.phi_steps,
    }


def extremal_to_dict(search: ExtremalSearch) -> dict[str, Any]:
    return {
        "L_min": search.l_min,
        "L_max": search.l_max,
        "argmin": _pairs(search.argmin.c[:, 0]),
        "argmax": _pairs(search.argmax.c[:, 0]),
        "certified": search.certified,
        "restarts": search.restarts,
    }


# ── CSV ──────────────────────────────────────────────────────

def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) if isinstance(v, float) else v for v in row])
    return out.getvalue()


def counts_csv(rec: CountRecord, lambda_hat: Optional[np.ndarray] = None) -> str:
    rows = (
        (j, float(rec.counts[j]), float(rec.times[j]),
         float(lambda_hat[j]) if lambda_hat is not None else "")
        for j in range(rec.counts.size)
    )
    return csv_text(COUNTS_HEADER, rows)


def grid_csv(grid: SphereGrid) -> str:
    rows = (
        (float(th), float(ph), float(grid.values[i, j]))
        for i, th in enumerate(grid.theta_deg)
        for j, ph in enumerate(grid.phi_deg)
    )
    return csv_text(("theta_deg", "phi_deg", "L"), rows)


def coefficients_csv(d: LossCoefficients) -> str:
    return csv_text(("index", "d"), ((j, float(v)) for j, v in enumerate(d.d)))


# ── Files ────────────────────────────────────────────────────

def write_text(path: Path, text: str) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)
    except OSError as exc:
        raise ExportError(f"cannot write {path}: {exc.strerror}") from exc
    logger.debug("Wrote %s", path)
    return path


def _finite_tree(data: Any) -> Any:
    if isinstance(data, float):
        return finite_or_none(data)
    if isinstance(data, dict):
        return {k: _finite_tree(v) for k, v in data.items()}
    if isinstance(data, (list, tuple)):
        return [_finite_tree(v) for v in data]
    if isinstance(data, np.generic):
        return _finite_tree(data.item())
    return data


def json_text(data: Any) -> str:
    """Indented JSON; inf and nan become null."""
    return json.dumps(_finite_tree(data), indent=2, allow_nan=False) + "\n"


def write_json(path: Path, data: Any) -> Path:
    return write_text(path, json_text(data))
