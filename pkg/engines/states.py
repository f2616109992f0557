"""States engine — fidelity, purification and the named benchmark states."""

from __future__ import annotations

import logging
import math
from typing import Optional

import numpy as np

from config import RANK_EIG_TOL
from engines import numerics
from exceptions import ContractError, DimensionError, RankDeficitError
from models import DensityMatrix, Purification, StateSpec

logger = logging.getLogger(__name__)


def _clip_unit(value: float) -> float:
    return min(1.0, max(0.0, value))


def fidelity(rho0: DensityMatrix, rho: DensityMatrix) -> float:
    """F = (tr sqrt(sqrt(ρ0) ρ sqrt(ρ0)))^2."""
    if rho0.s != rho.s:
        raise DimensionError(f"states of dimension {rho0.s} and {rho.s}")
    root = numerics.sqrtm_psd(rho0.rho)
    inner = root @ rho.rho @ root
    spectrum = numerics.psd_spectrum(0.5 * (inner + inner.conj().T)).eigenvalues
    return _clip_unit(float(np.sqrt(spectrum).sum()) ** 2)


def _pad(c: np.ndarray, r: int) -> np.ndarray:
    if c.shape[1] == r:
        return c
    return np.hstack([c, np.zeros((c.shape[0], r - c.shape[1]), dtype=complex)])


def uhlmann_fidelity(c0: Purification, c: Purification) -> float:
    """max over gauges of |<c0|c>|^2, i.e. the squared nuclear norm of c0^dagger c."""
    if c0.s != c.s:
        raise DimensionError(f"purifications of dimension {c0.s} and {c.s}")
    r = max(c0.r, c.r)
    overlap = _pad(c0.c, r).conj().T @ _pad(c.c, r)
    _, S, _ = numerics.svd(overlap, full=False)
    return _clip_unit(float(S.sum()) ** 2)


def infer_rank(rho: DensityMatrix, tol: float = RANK_EIG_TOL) -> int:
    """Number of eigenvalues above `tol`."""
    w = numerics.psd_spectrum(rho.rho).eigenvalues
    return int(np.count_nonzero(w > tol))


def purify(rho: DensityMatrix, r: int) -> Purification:
    """c = [sqrt(w_i) v_i] over the r largest eigenpairs, so c c^dagger = ρ."""
    if not 1 <= r <= rho.s:
        raise ContractError(f"rank {r} outside [1, {rho.s}]")
    eig = numerics.psd_spectrum(rho.rho)
    present = int(np.count_nonzero(eig.eigenvalues > RANK_EIG_TOL))
    if present > r:
        raise RankDeficitError(
            f"state has {present} eigenvalues above {RANK_EIG_TOL}, rank {r} is too small"
        )
    w = eig.eigenvalues[::-1][:r]
    V = eig.eigenvectors[:, ::-1][:, :r]
    c = V * np.sqrt(w)
    return Purification(c / np.linalg.norm(c))


def ghz(l: int) -> Purification:
    """(|0...0> + |1...1>)/sqrt(2) on l qubits."""
    if l < 2:
        raise ContractError("GHZ state needs at least 2 qubits")
    psi = np.zeros(2**l, dtype=complex)
    psi[0] = psi[-1] = 1.0 / math.sqrt(2.0)
    return Purification(psi)


def bell() -> Purification:
    return ghz(2)


def white_noise_mix(f: float, psi: Purification) -> DensityMatrix:
    """ρ = f E/s + (1 - f)|ψ><ψ|."""
    if not 0.0 <= f <= 1.0:
        raise ContractError(f"white-noise weight {f} outside [0, 1]")
    if psi.r != 1:
        raise ContractError("white-noise mixing needs a pure state")
    s = psi.s
    rho = f * np.eye(s) / s + (1.0 - f) * np.outer(psi.c[:, 0], psi.c[:, 0].conj())
    rank = 1 if f == 0.0 else s
    return DensityMatrix(0.5 * (rho + rho.conj().T), rank=rank)


def _gaussian(shape: tuple[int, ...], seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_purification(s: int, r: int, seed: int) -> Purification:
    """Normalized s x r factor with i.i.d. complex Gaussian entries."""
    if not 1 <= r <= s:
        raise ContractError(f"rank {r} outside [1, {s}]")
    c = _gaussian((s, r), seed)
    return Purification(c / np.linalg.norm(c))


def random_pure(s: int, seed: int) -> Purification:
    """Haar-uniform pure state."""
    return random_purification(s, 1, seed)


def random_mixed(s: int, r: int, seed: int) -> DensityMatrix:
    c = random_purification(s, r, seed)
    rho = c.density()
    return DensityMatrix(rho.rho, rank=r)


def named_state(spec: StateSpec, qubits: int, seed: Optional[int] = None) -> DensityMatrix:
    """State described by an experiment config.

    white-noise-mix uses the GHZ state as its pure part for two or more
    qubits, and a seeded random pure state for a single qubit.
    """
    s = 2**qubits
    state_seed = spec.seed if spec.seed is not None else (seed or 0)
    if spec.kind == "pure-random":
        return random_pure(s, state_seed).density()
    if spec.kind in ("ghz", "bell"):
        if spec.kind == "bell" and qubits != 2:
            raise ContractError("bell state is defined for 2 qubits; use ghz")
        return ghz(qubits).density()
    base = ghz(qubits) if qubits >= 2 else random_pure(s, state_seed)
    assert spec.f is not None
    return white_noise_mix(spec.f, base)
