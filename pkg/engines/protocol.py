"""Protocol engine — instrumental matrices, intensity operators, measurement matrix B.

Conventions shared with the states engine: multi-qubit rows and basis states
are ordered big-endian lexicographically (Kronecker order), and density
matrices are vectorized by stacking columns, so that B_j = t_j conj(X_j) ⊗ X_j
satisfies B vec(ρ) = λ t.
"""

from __future__ import annotations

import logging
from functools import reduce
from typing import Sequence

import numpy as np
import numpy.typing as npt

from config import MAX_TENSOR_ENTRIES, UNITY_RTOL
from engines import geometry, numerics
from exceptions import (
    ContractError,
    DegenerateStateError,
    DimensionError,
    MemoryGuardError,
)
from models import (
    AdequacyCheck,
    ComplexMatrix,
    Completeness,
    DensityMatrix,
    InstrumentalMatrix,
    IntensityOperator,
    MeasurementMatrix,
    PolyhedronKind,
    RealVector,
    UnityDecomposition,
)

logger = logging.getLogger(__name__)


# ── Construction ─────────────────────────────────────────────

def single_qubit_protocol(kind: PolyhedronKind) -> InstrumentalMatrix:
    """One row per face: the bra of the qubit state pointing along the face normal."""
    rows = [np.conj(geometry.direction_to_qubit(u)) for u in geometry.face_array(kind)]
    return InstrumentalMatrix(
        X=np.array(rows), times=np.ones(len(rows)), qubits=1, label=kind.label
    )


def tensor_power(
    p: InstrumentalMatrix, l: int, max_entries: int = MAX_TENSOR_ENTRIES
) -> InstrumentalMatrix:
    """l-qubit product protocol: rows are Kronecker products in lexicographic order."""
    if p.qubits != 1:
        raise ContractError("tensor_power needs a single-qubit protocol")
    if l < 1:
        raise ContractError("number of qubits must be >= 1")
    if l == 1:
        return p
    entries = (p.m * 4) ** l
    if entries > max_entries:
        raise MemoryGuardError(
            f"{p.label}^{l} needs {entries} measurement-matrix entries (cap {max_entries})"
        )
    X = reduce(np.kron, [p.X] * l)
    times = reduce(np.kron, [p.times] * l)
    logger.debug("Built %s^%d protocol with %d rows", p.label, l, X.shape[0])
    return InstrumentalMatrix(X=X, times=times, qubits=l, label=f"{p.label}^{l}")


def polyhedron_protocol(kind: PolyhedronKind, qubits: int = 1) -> InstrumentalMatrix:
    return tensor_power(single_qubit_protocol(kind), qubits)


def from_rows(
    rows: npt.ArrayLike, label: str = "custom", times: npt.ArrayLike | None = None
) -> InstrumentalMatrix:
    """Protocol from explicit amplitude rows (unit times unless given)."""
    X = np.atleast_2d(np.asarray(rows, dtype=complex))
    qubits = int(round(np.log2(X.shape[1])))
    t = np.ones(X.shape[0]) if times is None else np.asarray(times, dtype=float)
    return InstrumentalMatrix(X=X, times=t, qubits=qubits, label=label)


def with_times(p: InstrumentalMatrix, times: npt.ArrayLike) -> InstrumentalMatrix:
    return InstrumentalMatrix(X=p.X, times=np.asarray(times, float), qubits=p.qubits, label=p.label)


# ── Intensity operators ──────────────────────────────────────

def intensity_operator(p: InstrumentalMatrix, j: int) -> IntensityOperator:
    """Λ_j = X_j^dagger X_j for row j (0-based)."""
    if not 0 <= j < p.m:
        raise ContractError(f"row {j} outside [0, {p.m})")
    row = p.X[j]
    return IntensityOperator(matrix=np.outer(row.conj(), row))


def mixture_operator(
    rows: Sequence[npt.ArrayLike], weights: Sequence[float]
) -> IntensityOperator:
    """Λ = Σ_k f_k X^(k)^dagger X^(k) for a mixture of projections."""
    if len(rows) != len(weights) or not rows:
        raise ContractError("need one positive weight per component row")
    if any(w <= 0 for w in weights):
        raise ContractError("mixture weights must be positive")
    arrs = [np.asarray(r, dtype=complex) for r in rows]
    matrix = sum(w * np.outer(r.conj(), r) for w, r in zip(weights, arrs))
    return IntensityOperator(
        matrix=np.asarray(matrix),
        weights=tuple(float(w) for w in weights),
        components=tuple(tuple(complex(v) for v in r) for r in arrs),
    )


def operator_intensity(op: IntensityOperator, rho: DensityMatrix) -> float:
    """λ = tr(Λ ρ)."""
    if op.matrix.shape != rho.rho.shape:
        raise DimensionError("operator and state dimensions differ")
    return max(0.0, float(np.trace(op.matrix @ rho.rho).real))


def amplitudes(p: InstrumentalMatrix, c: npt.ArrayLike) -> np.ndarray:
    """M_j = Σ_l X_jl c_l."""
    vec = np.asarray(c, dtype=complex)
    if vec.shape != (p.s,):
        raise DimensionError(f"state vector needs length {p.s}, got {vec.shape}")
    return np.asarray(p.X @ vec)


def row_intensities(X: ComplexMatrix, rho: np.ndarray) -> RealVector:
    """tr(Λ_j ρ) for every row of X, small negative rounding clipped to zero."""
    lam = np.einsum("jb,ba,ja->j", X, rho, X.conj()).real
    return np.clip(lam, 0.0, None)


def intensities(p: InstrumentalMatrix, rho: DensityMatrix) -> RealVector:
    if rho.s != p.s:
        raise DimensionError(f"state dimension {rho.s} != protocol dimension {p.s}")
    return row_intensities(p.X, rho.rho)


def set_times_for_sample(p: InstrumentalMatrix, rho: DensityMatrix, n: float) -> InstrumentalMatrix:
    """Rescale exposure times so the expected total count is n."""
    if n <= 0:
        raise ContractError("sample size must be positive")
    total = float(np.dot(intensities(p, rho), p.times))
    if total <= 0:
        raise DegenerateStateError(f"all intensities of {p.label} vanish for this state")
    return with_times(p, p.times * (n / total))


def total_intensity_operator(p: InstrumentalMatrix) -> ComplexMatrix:
    """I = Σ_j t_j Λ_j."""
    return np.asarray((p.X.conj().T * p.times) @ p.X)


def unity_decomposition(p: InstrumentalMatrix) -> UnityDecomposition:
    I = total_intensity_operator(p)
    i0 = float(np.trace(I).real) / p.s
    residual = float(np.linalg.norm(I - i0 * np.eye(p.s)))
    if residual <= UNITY_RTOL * i0:
        return UnityDecomposition(intensity=i0, residual=residual)
    return UnityDecomposition(intensity=None, residual=residual)


# ── Measurement matrix ───────────────────────────────────────

def vec(rho: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization."""
    return np.asarray(rho).reshape(-1, order="F")


def devec(v: np.ndarray, s: int) -> np.ndarray:
    return np.asarray(v).reshape((s, s), order="F")


def measurement_matrix(p: InstrumentalMatrix, unit_times: bool = False) -> MeasurementMatrix:
    """B with rows t_j conj(X_j) ⊗ X_j; `unit_times` uses t_j = 1."""
    m, s = p.m, p.s
    if m * s * s > MAX_TENSOR_ENTRIES:
        raise MemoryGuardError(f"measurement matrix {m}x{s * s} exceeds the size cap")
    kron_rows = (p.X.conj()[:, :, None] * p.X[:, None, :]).reshape(m, s * s)
    t = np.ones(m) if unit_times else p.times
    return MeasurementMatrix(B=t[:, None] * kron_rows)


def completeness(p: InstrumentalMatrix) -> Completeness:
    _, S, _ = numerics.svd(measurement_matrix(p).B, full=False)
    q = numerics.rank_of(S)
    return Completeness(q=q, complete=q == p.s * p.s, singulars=S)


def adequacy_possible(p: InstrumentalMatrix, r: int) -> AdequacyCheck:
    """Degrees of freedom ν = m - (2s - r) r of the chi-squared adequacy test."""
    if not 1 <= r <= p.s:
        raise ContractError(f"rank {r} outside [1, {p.s}]")
    dof = p.m - (2 * p.s - r) * r
    return AdequacyCheck(redundant=dof > 0, dof=dof)
