"""Loading of experiment configs, protocols, states and count records."""

from __future__ import annotations

import csv
import json
import logging
from pathlib import Path
from typing import Any, Optional

import numpy as np

from config import EXPERIMENTS_DIR
from exceptions import ContractError, DataLoadError
from models import (
    CountRecord,
    DensityMatrix,
    ExperimentConfig,
    InstrumentalMatrix,
    PolyhedronKind,
    StateSpec,
)

logger = logging.getLogger(__name__)

COUNTS_HEADER = ("row", "count", "time", "lambda_hat")


def read_json(path: Path) -> Any:
    try:
        with open(path, encoding="utf-8") as f:
            return json.load(f)
    except OSError as exc:
        raise DataLoadError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise DataLoadError(f"{path} is not valid JSON: {exc.msg} (line {exc.lineno})") from exc


def _pairs_to_complex(values: Any, where: str) -> np.ndarray:
    try:
        arr = np.asarray(values, dtype=float)
    except (TypeError, ValueError) as exc:
        raise DataLoadError(f"{where}: entries must be numbers") from exc
    if arr.shape[-1] != 2:
        raise DataLoadError(f"{where}: complex entries must be [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def protocol_from_dict(data: dict[str, Any]) -> InstrumentalMatrix:
    """{label, qubits, times[], rows[][2s]} with rows as interleaved re, im."""
    try:
        qubits = int(data["qubits"])
        rows = np.asarray(data["rows"], dtype=float)
        times = np.asarray(data["times"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise DataLoadError(f"protocol record is incomplete: {exc}") from exc
    if rows.ndim != 2 or rows.shape[1] % 2:
        raise DataLoadError("protocol rows must hold 2s numbers each")
    X = rows[:, 0::2] + 1j * rows[:, 1::2]
    return InstrumentalMatrix(X=X, times=times, qubits=qubits, label=str(data.get("label", "")))


def state_from_dict(data: dict[str, Any]) -> DensityMatrix:
    """{s, r, entries} with entries an s x s grid of [re, im] pairs."""
    try:
        s = int(data["s"])
        entries = data["entries"]
    except (KeyError, TypeError, ValueError) as exc:
        raise DataLoadError(f"state record is incomplete: {exc}") from exc
    rho = _pairs_to_complex(entries, "state")
    if rho.shape != (s, s):
        raise DataLoadError(f"state entries have shape {rho.shape}, expected ({s}, {s})")
    rank = data.get("r")
    return DensityMatrix(rho, rank=int(rank) if rank is not None else None)


def load_protocol(path: Path) -> InstrumentalMatrix:
    return protocol_from_dict(read_json(path))


def load_state(path: Path) -> DensityMatrix:
    return state_from_dict(read_json(path))


def load_counts(path: Path, label: str = "") -> CountRecord:
    """Count record from a CSV with header row,count,time[,lambda_hat]."""
    try:
        with open(path, encoding="utf-8", newline="") as f:
            rows = list(csv.DictReader(f))
    except OSError as exc:
        raise DataLoadError(f"cannot read {path}: {exc.strerror}") from exc
    if not rows:
        raise DataLoadError(f"{path} has no data rows")
    try:
        rows.sort(key=lambda r: int(r["row"]))
        counts = [float(r["count"]) for r in rows]
        times = [float(r["time"]) for r in rows]
    except (KeyError, TypeError, ValueError) as exc:
        raise DataLoadError(f"{path}: expected columns {', '.join(COUNTS_HEADER[:3])}") from exc
    logger.debug("Loaded %d count rows from %s", len(rows), path)
    return CountRecord(counts=np.array(counts), times=np.array(times), label=label or path.stem)


def experiment_from_dict(data: dict[str, Any]) -> ExperimentConfig:
    """Experiment config from its flat JSON form.

    `state` is either a kind name or {kind, f, seed}.
    """
    if not isinstance(data, dict):
        raise DataLoadError("experiment config must be a JSON object")
    try:
        raw_state = data.get("state", "pure-random")
        if isinstance(raw_state, str):
            state = StateSpec(kind=raw_state, f=data.get("f"), seed=data.get("state_seed"))
        else:
            state = StateSpec(
                kind=raw_state.get("kind", "pure-random"),
                f=raw_state.get("f"),
                seed=raw_state.get("seed"),
            )
        return ExperimentConfig(
            polyhedron=PolyhedronKind.parse(str(data["polyhedron"])),
            qubits=int(data.get("qubits", 1)),
            state=state,
            rank=int(data.get("rank", 1)),
            sample_size=float(data.get("sample_size", 1e6)),
            runs=int(data.get("runs", 1)),
            seed=int(data.get("seed", 0)),
            workers=int(data.get("workers", 1)),
            theory_only=bool(data.get("theory_only", False)),
            theory_draws=int(data.get("theory_draws", 10_000)),
            csv_out=Path(data["csv_out"]) if data.get("csv_out") else None,
            json_out=Path(data["json_out"]) if data.get("json_out") else None,
        )
    except ContractError:
        raise
    except KeyError as exc:
        raise DataLoadError(f"experiment config is missing {exc}") from exc
    except (TypeError, AttributeError, ValueError) as exc:
        raise DataLoadError(f"experiment config has a malformed field: {exc}") from exc


class DataLoader:
    """Resolves bundled or user experiment configs and applies CLI overrides."""

    def __init__(self, experiments_dir: Path = EXPERIMENTS_DIR) -> None:
        self.experiments_dir = experiments_dir

    def list_experiments(self) -> list[str]:
        if not self.experiments_dir.is_dir():
            return []
        return sorted(p.stem for p in self.experiments_dir.glob("*.json"))

    def resolve(self, name_or_path: str) -> Path:
        path = Path(name_or_path)
        if path.exists():
            return path
        bundled = self.experiments_dir / f"{name_or_path.removesuffix('.json')}.json"
        if bundled.exists():
            return bundled
        known = ", ".join(self.list_experiments()) or "none"
        raise DataLoadError(f"no experiment config '{name_or_path}' (bundled: {known})")

    def load_experiment(
        self, name_or_path: str, overrides: Optional[dict[str, Any]] = None
    ) -> ExperimentConfig:
        path = self.resolve(name_or_path)
        data = read_json(path)
        if not isinstance(data, dict):
            raise DataLoadError(f"{path} must hold a JSON object")
        for key, value in (overrides or {}).items():
            if value is not None:
                data[key] = value
        logger.info("Loaded experiment %s", path)
        return experiment_from_dict(data)
