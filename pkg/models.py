"""Data models for polytomo."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import NamedTuple, Optional

import numpy as np
import numpy.typing as npt

from config import (
    DEFAULT_ALPHA,
    HERMITIAN_TOL,
    MLE_CHANGE_TOL,
    MLE_MAX_ITER,
    MLE_RESIDUAL_TOL,
    MLE_STEP,
    STATE_EIG_TOL,
    TRACE_TOL,
)
from exceptions import ContractError, DimensionError

ComplexMatrix = npt.NDArray[np.complex128]
RealVector = npt.NDArray[np.float64]


def _frozen(a: npt.ArrayLike, dtype: type) -> np.ndarray:
    """Read-only copy of `a`; domain values are immutable after construction."""
    out = np.array(a, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


# ── Geometry ─────────────────────────────────────────────────

class Direction(NamedTuple):
    x: float
    y: float
    z: float

    def as_array(self) -> RealVector:
        return np.array([self.x, self.y, self.z], dtype=float)


class PolyhedronKind(Enum):
    """The seven solids; the value is the face count."""

    TETRAHEDRON = 4
    CUBE = 6
    OCTAHEDRON = 8
    DODECAHEDRON = 12
    ICOSAHEDRON = 20
    FULLERENE = 32
    PENTAKIS_DODECAHEDRON = 60

    @property
    def faces(self) -> int:
        return self.value

    @property
    def label(self) -> str:
        return self.name.lower().replace("_", "-")

    @classmethod
    def parse(cls, name: str) -> PolyhedronKind:
        key = name.strip().lower().replace("_", "-")
        aliases = {"pentakis": "pentakis-dodecahedron", "truncated-icosahedron": "fullerene"}
        key = aliases.get(key, key)
        for kind in cls:
            if kind.label == key:
                return kind
        choices = ", ".join(k.label for k in cls)
        raise ContractError(f"unknown polyhedron '{name}' (choose from {choices})")


# ── Linear algebra ───────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class HermitianEig:
    eigenvalues: RealVector      # ascending
    eigenvectors: ComplexMatrix  # columns


# ── Protocols ────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class InstrumentalMatrix:
    """Protocol matrix X (m x s) with per-row exposure times."""

    X: ComplexMatrix
    times: RealVector
    qubits: int
    label: str = ""

    def __post_init__(self) -> None:
        X = _frozen(self.X, np.complex128)
        times = _frozen(self.times, np.float64)
        if X.ndim != 2 or X.shape[0] < 1:
            raise DimensionError(f"instrumental matrix must be 2-D with m >= 1, got {X.shape}")
        if X.shape[1] != 2**self.qubits:
            raise DimensionError(f"{X.shape[1]} columns do not match {self.qubits} qubit(s)")
        if times.shape != (X.shape[0],):
            raise DimensionError(f"need {X.shape[0]} exposure times, got {times.shape}")
        if not np.all(np.isfinite(X)) or not np.all(times > 0):
            raise ContractError("entries must be finite and times positive")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "times", times)

    @property
    def m(self) -> int:
        return int(self.X.shape[0])

    @property
    def s(self) -> int:
        return int(self.X.shape[1])


@dataclass(frozen=True, eq=False)
class IntensityOperator:
    """Λ_j; `components`/`weights` are set when built as a mixture of projections."""

    matrix: ComplexMatrix
    weights: tuple[float, ...] = ()
    components: tuple[tuple[complex, ...], ...] = ()


@dataclass(frozen=True, eq=False)
class MeasurementMatrix:
    """B with rows t_j * conj(X_j) ⊗ X_j (column-stacking vectorization)."""

    B: ComplexMatrix

    @property
    def shape(self) -> tuple[int, int]:
        return (int(self.B.shape[0]), int(self.B.shape[1]))


@dataclass(frozen=True)
class UnityDecomposition:
    """Result of the decomposition-of-unity check; `intensity` is I0 when it holds."""

    intensity: Optional[float]
    residual: float

    @property
    def holds(self) -> bool:
        return self.intensity is not None


@dataclass(frozen=True, eq=False)
class Completeness:
    q: int
    complete: bool
    singulars: RealVector


@dataclass(frozen=True)
class AdequacyCheck:
    redundant: bool
    dof: int


# ── States ───────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class DensityMatrix:
    rho: ComplexMatrix
    rank: Optional[int] = None

    def __post_init__(self) -> None:
        rho = _frozen(self.rho, np.complex128)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise DimensionError(f"density matrix must be square, got {rho.shape}")
        if np.max(np.abs(rho - rho.conj().T)) > HERMITIAN_TOL:
            raise ContractError("density matrix is not Hermitian")
        if abs(np.trace(rho).real - 1.0) > TRACE_TOL:
            raise ContractError(f"density matrix trace {np.trace(rho).real!r} != 1")
        if np.linalg.eigvalsh(rho)[0] < -STATE_EIG_TOL:
            raise ContractError("density matrix has a negative eigenvalue")
        if self.rank is not None and not 1 <= self.rank <= rho.shape[0]:
            raise ContractError(f"rank {self.rank} outside [1, {rho.shape[0]}]")
        object.__setattr__(self, "rho", rho)

    @property
    def s(self) -> int:
        return int(self.rho.shape[0])


@dataclass(frozen=True, eq=False)
class Purification:
    """Factor c (s x r) with rho = c c^dagger."""

    c: ComplexMatrix

    def __post_init__(self) -> None:
        c = _frozen(self.c, np.complex128)
        if c.ndim == 1:
            c = _frozen(c.reshape(-1, 1), np.complex128)
        if c.ndim != 2 or c.shape[1] > c.shape[0]:
            raise DimensionError(f"purification must be s x r with r <= s, got {c.shape}")
        if abs(np.vdot(c, c).real - 1.0) > TRACE_TOL:
            raise ContractError("purification is not normalized")
        object.__setattr__(self, "c", c)

    @property
    def s(self) -> int:
        return int(self.c.shape[0])

    @property
    def r(self) -> int:
        return int(self.c.shape[1])

    def density(self) -> DensityMatrix:
        rho = self.c @ self.c.conj().T
        return DensityMatrix(0.5 * (rho + rho.conj().T), rank=self.r)


# ── Simulation and reconstruction ────────────────────────────

@dataclass(frozen=True, eq=False)
class CountRecord:
    """Counts per protocol row. Simulated counts are integral; expected counts may not be."""

    counts: RealVector
    times: RealVector
    label: str = ""
    seed: Optional[int] = None

    def __post_init__(self) -> None:
        counts = _frozen(self.counts, np.float64)
        times = _frozen(self.times, np.float64)
        if counts.shape != times.shape or counts.ndim != 1:
            raise DimensionError("counts and times must be vectors of equal length")
        if np.any(counts < 0) or not np.all(np.isfinite(counts)):
            raise ContractError("counts must be finite and non-negative")
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "times", times)

    @property
    def total(self) -> float:
        return float(self.counts.sum())


@dataclass(frozen=True)
class MleOptions:
    max_iter: int = MLE_MAX_ITER
    step: float = MLE_STEP
    residual_tol: float = MLE_RESIDUAL_TOL
    change_tol: float = MLE_CHANGE_TOL
    seed: int = 0              # start perturbation of zero columns
    alpha: float = DEFAULT_ALPHA
    ranks: Optional[tuple[int, ...]] = None   # candidate ranks for automatic selection

    def __post_init__(self) -> None:
        if self.max_iter < 1:
            raise ContractError("max_iter must be >= 1")
        if not 0.0 < self.step <= 1.0:
            raise ContractError("step must be in (0, 1]")
        if not 0.0 < self.alpha < 1.0:
            raise ContractError("alpha must be in (0, 1)")


@dataclass(frozen=True, eq=False)
class ReconstructionResult:
    c_hat: Purification
    rho_hat: DensityMatrix
    loglik: float
    iterations: int
    converged: bool
    gradient_norm: float
    lambda_hat: RealVector   # fitted intensities, sum(lambda_hat * t) == total counts
    loglik_trace: tuple[float, ...] = ()   # accepted iterates

    @property
    def rank(self) -> int:
        return self.c_hat.r


@dataclass(frozen=True)
class AdequacyReport:
    statistic: float
    dof: int
    p_value: float
    adequate: bool
    alpha: float
    low_expectation_rows: int = 0


@dataclass(frozen=True, eq=False)
class RankCandidate:
    rank: int
    result: ReconstructionResult
    report: Optional[AdequacyReport] = None


@dataclass(frozen=True, eq=False)
class RankSelection:
    """Outcome of automatic rank selection; `adequate` is False when no rank passed."""

    result: ReconstructionResult
    adequate: bool
    candidates: tuple[RankCandidate, ...]

    @property
    def rank(self) -> int:
        return self.result.rank


@dataclass(frozen=True, eq=False)
class BatchRun:
    index: int
    record: CountRecord
    result: Optional[ReconstructionResult] = None
    loss: Optional[float] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


# ── Fidelity-loss distribution ───────────────────────────────

@dataclass(frozen=True, eq=False)
class LossCoefficients:
    d: RealVector
    n: float
    s: int
    r: int

    def __post_init__(self) -> None:
        d = np.asarray(self.d, dtype=float)
        if d.shape != (self.j_max,):
            raise DimensionError(f"expected {self.j_max} coefficients, got {d.shape}")
        if np.any(d < -1e-14):
            raise ContractError("loss coefficients must be non-negative")
        object.__setattr__(self, "d", _frozen(np.clip(d, 0.0, None), np.float64))

    @property
    def j_max(self) -> int:
        return (2 * self.s - self.r) * self.r - 1


@dataclass(frozen=True)
class DistributionTest:
    ks_statistic: float
    ks_p_value: float
    chi2_statistic: float
    chi2_dof: int
    chi2_p_value: float


# ── Scan ─────────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class SphereGrid:
    theta_deg: RealVector      # cell centres, length theta_steps
    phi_deg: RealVector        # cell centres, length phi_steps
    values: npt.NDArray[np.float64]
    min: float
    max: float
    argmin: tuple[float, float]   # (theta, phi) in radians
    argmax: tuple[float, float]

    @property
    def theta_steps(self) -> int:
        return len(self.theta_deg)

    @property
    def phi_steps(self) -> int:
        return len(self.phi_deg)


@dataclass(frozen=True, eq=False)
class ExtremalSearch:
    l_min: float
    l_max: float
    argmin: Purification
    argmax: Purification
    certified: bool
    restarts: int


# ── CLI experiments ──────────────────────────────────────────

STATE_KINDS = ("pure-random", "ghz", "bell", "white-noise-mix")


@dataclass(frozen=True)
class StateSpec:
    kind: str = "pure-random"
    f: Optional[float] = None
    seed: Optional[int] = None

    def __post_init__(self) -> None:
        if self.kind not in STATE_KINDS:
            raise ContractError(f"unknown state kind '{self.kind}'")
        if self.kind == "white-noise-mix" and (self.f is None or not 0.0 <= self.f <= 1.0):
            raise ContractError("white-noise-mix needs a weight f in [0, 1]")


@dataclass(frozen=True)
class ExperimentConfig:
    polyhedron: PolyhedronKind
    qubits: int = 1
    state: StateSpec = field(default_factory=StateSpec)
    rank: int = 1
    sample_size: float = 1e6
    runs: int = 1
    seed: int = 0
    workers: int = 1
    theory_only: bool = False
    theory_draws: int = 10_000
    csv_out: Optional[Path] = None
    json_out: Optional[Path] = None

    def __post_init__(self) -> None:
        if self.qubits < 1:
            raise ContractError("qubits must be >= 1")
        if self.sample_size < 1:
            raise ContractError("sample_size must be >= 1")
        if self.runs < 1:
            raise ContractError("runs must be >= 1")
        if not 1 <= self.rank <= 2**self.qubits:
            raise ContractError(f"rank {self.rank} outside [1, {2**self.qubits}]")
        if self.state.kind in ("ghz", "bell") and self.qubits < 2:
            raise ContractError(f"{self.state.kind} state needs at least 2 qubits")
