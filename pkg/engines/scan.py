"""Scan engine — loss function over the Bloch sphere and multi-start extremal search."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Optional

import numpy as np
from scipy import optimize

from config import (
    BOUNDARY_OFFSET_RAD,
    BOUNDARY_OFFSET_STEPS,
    DEFAULT_RESOLUTION_DEG,
    DEFAULT_RESTARTS,
    EARLY_STOP_HITS,
    EXTREME_MATCH_TOL,
    MAX_RESOLUTION_DEG,
    MIN_RESOLUTION_DEG,
    POLE_MARGIN_RAD,
    REFINE_SEEDS,
    REFINE_TOL_RAD,
)
from engines import geometry, lossdist, protocol, states
from engines.simulate import ProgressHook, child_seed
from exceptions import BoundaryStateError, ContractError, NumericError
from models import ExtremalSearch, InstrumentalMatrix, PolyhedronKind, Purification, SphereGrid

logger = logging.getLogger(__name__)

MAX_REFINE_ROUNDS = 50


# ── Bloch sphere ─────────────────────────────────────────────

def _qubit(theta: float, phi: float) -> np.ndarray:
    return geometry.direction_to_qubit(geometry.spherical_direction(theta, phi))


def _clamp_theta(theta: float) -> float:
    return min(math.pi - POLE_MARGIN_RAD, max(POLE_MARGIN_RAD, theta))


def bloch_loss(p: InstrumentalMatrix, theta: float, phi: float, n: float = 1.0) -> float:
    """L at the pure state (θ, φ).

    Boundary states are evaluated a small offset away toward the equator; the
    offset grows tenfold until the shifted state has no zero-intensity row.
    """
    try:
        return lossdist.pure_state_loss(p, _qubit(theta, phi), n)
    except BoundaryStateError:
        sign = 1.0 if theta < math.pi / 2 else -1.0
    for k in range(BOUNDARY_OFFSET_STEPS):
        shifted = theta + sign * BOUNDARY_OFFSET_RAD * 10**k
        try:
            return lossdist.pure_state_loss(p, _qubit(shifted, phi), n)
        except BoundaryStateError:
            continue
    raise BoundaryStateError(f"no interior state near theta={theta:.10g}, phi={phi:.10g}")


def _refine(
    objective: Callable[[float, float], float], theta: float, phi: float, width: float
) -> tuple[float, float, float]:
    """Alternating bounded line searches in θ and φ until the point stops moving."""
    value = objective(theta, phi)
    for _ in range(MAX_REFINE_ROUNDS):
        lo, hi = _clamp_theta(theta - width), _clamp_theta(theta + width)
        res_t = optimize.minimize_scalar(
            lambda x: objective(x, phi), bounds=(lo, hi), method="bounded",
            options={"xatol": REFINE_TOL_RAD / 10},
        )
        new_theta = float(res_t.x) if res_t.fun <= value else theta
        value = min(value, float(res_t.fun))
        res_p = optimize.minimize_scalar(
            lambda x: objective(new_theta, x), bounds=(phi - width, phi + width),
            method="bounded", options={"xatol": REFINE_TOL_RAD / 10},
        )
        new_phi = float(res_p.x) if res_p.fun <= value else phi
        value = min(value, float(res_p.fun))
        moved = math.hypot(new_theta - theta, math.sin(theta) * (new_phi - phi))
        theta, phi = new_theta, new_phi
        if moved < REFINE_TOL_RAD:
            break
    return value, theta, phi


def _boundary_candidates(kind: PolyhedronKind) -> list[tuple[float, float]]:
    """Face directions and their antipodes, where maxima of symmetric solids sit."""
    out = []
    for u in geometry.face_array(kind):
        for v in (u, -u):
            polar = math.acos(max(-1.0, min(1.0, float(v[2]))))
            theta = _clamp_theta(polar + BOUNDARY_OFFSET_RAD)
            out.append((theta, math.atan2(float(v[1]), float(v[0]))))
    return out


def scan_bloch(
    kind: PolyhedronKind,
    resolution: float = DEFAULT_RESOLUTION_DEG,
    n: float = 1.0,
    refine: bool = True,
    progress: Optional[ProgressHook] = None,
) -> SphereGrid:
    """Grid of L over cell-centred (θ, φ) with refined extremes."""
    if not MIN_RESOLUTION_DEG <= resolution <= MAX_RESOLUTION_DEG:
        raise ContractError(
            f"resolution {resolution} outside [{MIN_RESOLUTION_DEG}, {MAX_RESOLUTION_DEG}] degrees"
        )
    p = protocol.single_qubit_protocol(kind)
    theta_steps = max(1, round(180.0 / resolution))
    phi_steps = max(1, round(360.0 / resolution))
    theta_deg = (np.arange(theta_steps) + 0.5) * 180.0 / theta_steps
    phi_deg = (np.arange(phi_steps) + 0.5) * 360.0 / phi_steps
    theta_rad, phi_rad = np.radians(theta_deg), np.radians(phi_deg)

    values = np.empty((theta_steps, phi_steps))
    for i, th in enumerate(theta_rad):
        for j, ph in enumerate(phi_rad):
            values[i, j] = bloch_loss(p, float(th), float(ph), n)
        if progress:
            progress(i)
    logger.info("Scanned %s on a %dx%d grid", kind.label, theta_steps, phi_steps)

    flat = values.ravel()
    i_min = np.unravel_index(flat.argmin(), values.shape)
    i_max = np.unravel_index(flat.argmax(), values.shape)
    best_min = (float(values[i_min]), float(theta_rad[i_min[0]]), float(phi_rad[i_min[1]]))
    best_max = (float(values[i_max]), float(theta_rad[i_max[0]]), float(phi_rad[i_max[1]]))

    if refine:
        width = math.radians(resolution)
        order = np.argsort(flat)
        seeds_min = [divmod(int(k), phi_steps) for k in order[:REFINE_SEEDS]]
        seeds_max = [divmod(int(k), phi_steps) for k in order[::-1][:REFINE_SEEDS]]
        boundary = _boundary_candidates(kind)

        def low(th: float, ph: float) -> float:
            return bloch_loss(p, th, ph, n)

        def high(th: float, ph: float) -> float:
            return -bloch_loss(p, th, ph, n)

        for th, ph in [(theta_rad[a], phi_rad[b]) for a, b in seeds_min] + boundary:
            val, t_r, p_r = _refine(low, float(th), float(ph), width)
            if val < best_min[0]:
                best_min = (val, t_r, p_r)
        for th, ph in [(theta_rad[a], phi_rad[b]) for a, b in seeds_max] + boundary:
            val, t_r, p_r = _refine(high, float(th), float(ph), width)
            if -val > best_max[0]:
                best_max = (-val, t_r, p_r)
        logger.debug("%s refined: min %.10g, max %.10g", kind.label, best_min[0], best_max[0])

    return SphereGrid(
        theta_deg=theta_deg,
        phi_deg=phi_deg,
        values=values,
        min=best_min[0],
        max=best_max[0],
        argmin=(best_min[1], best_min[2]),
        argmax=(best_max[1], best_max[2]),
    )


# ── Multi-qubit extremes ─────────────────────────────────────

def _local_search(
    p: InstrumentalMatrix, start: np.ndarray, sign: float
) -> tuple[float, np.ndarray]:
    """Powell search over 2s real parameters; returns (L, normalized state)."""
    s = p.s

    def objective(x: np.ndarray) -> float:
        psi = x[:s] + 1j * x[s:]
        if not np.any(psi):
            return math.inf
        try:
            return sign * lossdist.pure_state_loss(p, psi)
        except (BoundaryStateError, NumericError):
            return math.inf

    x0 = np.concatenate([start.real, start.imag])
    res = optimize.minimize(
        objective, x0, method="Powell", options={"xtol": 1e-8, "ftol": 1e-12, "maxiter": 20_000}
    )
    psi = res.x[:s] + 1j * res.x[s:]
    return sign * float(res.fun), psi / np.linalg.norm(psi)


def _restart(p: InstrumentalMatrix, seed: int) -> tuple[float, np.ndarray, float, np.ndarray]:
    start = states.random_pure(p.s, seed).c[:, 0]
    l_min, psi_min = _local_search(p, start, 1.0)
    l_max, psi_max = _local_search(p, start, -1.0)
    return l_min, psi_min, l_max, psi_max


def _matches(a: float, b: float) -> bool:
    return abs(a - b) <= EXTREME_MATCH_TOL * max(1.0, abs(b))


def extremal_loss(
    p: InstrumentalMatrix,
    restarts: Optional[int] = None,
    seed: int = 0,
    workers: int = 1,
    progress: Optional[ProgressHook] = None,
) -> ExtremalSearch:
    """Smallest and largest pure-state loss found from Haar-random starts.

    Restart i starts from child_seed(seed, i). Results are consumed in index
    order and the search stops once both extremes have been re-found
    EARLY_STOP_HITS times, so the outcome does not depend on `workers`.
    """
    budget = restarts if restarts is not None else DEFAULT_RESTARTS.get(p.qubits, 300)
    if budget < 1:
        raise ContractError("restarts must be >= 1")
    block = max(1, workers)
    best_min: Optional[tuple[float, np.ndarray]] = None
    best_max: Optional[tuple[float, np.ndarray]] = None
    hits_min = hits_max = 0
    used = 0

    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for first in range(0, budget, block):
            indices = range(first, min(first + block, budget))
            seeds = [child_seed(seed, i) for i in indices]
            if pool is not None:
                outcomes = list(pool.map(_restart, [p] * len(seeds), seeds))
            else:
                outcomes = [_restart(p, sd) for sd in seeds]
            for i, (l_min, psi_min, l_max, psi_max) in zip(indices, outcomes):
                used = i + 1
                if best_min is None or l_min < best_min[0] and not _matches(l_min, best_min[0]):
                    best_min, hits_min = (l_min, psi_min), 1
                elif _matches(l_min, best_min[0]):
                    hits_min += 1
                if best_max is None or l_max > best_max[0] and not _matches(l_max, best_max[0]):
                    best_max, hits_max = (l_max, psi_max), 1
                elif _matches(l_max, best_max[0]):
                    hits_max += 1
                if progress:
                    progress(i)
                if hits_min >= EARLY_STOP_HITS and hits_max >= EARLY_STOP_HITS:
                    break
            if hits_min >= EARLY_STOP_HITS and hits_max >= EARLY_STOP_HITS:
                logger.info("Extremes re-found %d times after %d restarts", EARLY_STOP_HITS, used)
                break
    finally:
        if pool is not None:
            pool.shutdown()

    assert best_min is not None and best_max is not None
    certified = hits_min >= 2 and hits_max >= 2
    if not certified:
        logger.warning("Extremes of %s were not re-found; result is not certified", p.label)
    return ExtremalSearch(
        l_min=best_min[0],
        l_max=best_max[0],
        argmin=Purification(best_min[1]),
        argmax=Purification(best_max[1]),
        certified=certified,
        restarts=used,
    )
