"""Application context — run settings and cached protocols."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any, Optional

from config import DEFAULT_OUTPUT_DIR
from engines import protocol
from exceptions import ContractError
from models import InstrumentalMatrix, PolyhedronKind

logger = logging.getLogger(__name__)


class AppContext:
    """Holds the settings shared by every command and the protocols built so far.

    `workers` and `seed` left as None fall back to 1 and 0; only values given
    explicitly appear in `overrides`, which take precedence over experiment files.
    """

    def __init__(
        self,
        workers: Optional[int] = None,
        seed: Optional[int] = None,
        output_dir: Path = DEFAULT_OUTPUT_DIR,
    ) -> None:
        if workers is not None and workers < 1:
            raise ContractError("workers must be >= 1")
        self.workers = workers if workers is not None else 1
        self.seed = seed if seed is not None else 0
        self.output_dir = output_dir
        self.overrides: dict[str, Any] = {
            key: value for key, value in (("workers", workers), ("seed", seed)) if value is not None
        }
        self._protocols: dict[tuple[PolyhedronKind, int], InstrumentalMatrix] = {}

    def protocol(self, kind: PolyhedronKind, qubits: int = 1) -> InstrumentalMatrix:
        """Polyhedron protocol for `qubits`, built once per run."""
        key = (kind, qubits)
        if key not in self._protocols:
            logger.debug("Building %s protocol for %d qubit(s)", kind.label, qubits)
            self._protocols[key] = protocol.polyhedron_protocol(kind, qubits)
        return self._protocols[key]

    def output_path(self, path: Optional[Path], default_name: str) -> Path:
        """Explicit paths are used as given; otherwise the file lands in output_dir."""
        if path is not None:
            return path
        return self.output_dir / default_name
