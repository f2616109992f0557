"""Face-normal directions of the seven polyhedra behind single-qubit protocols.

Every solid is built in one orientation: the icosahedron has its vertices at
the cyclic permutations of (0, ±1, ±φ); the tetrahedron uses (±1, ±1, ±1) with
an even number of minus signs; the cube is axis-aligned; the octahedron's
faces point along (±1, ±1, ±1)/√3.
"""

from __future__ import annotations

import itertools
import math
from functools import cache

import numpy as np

from models import Direction, PolyhedronKind, RealVector

PHI = (1.0 + math.sqrt(5.0)) / 2.0


def _normalized(points: np.ndarray) -> np.ndarray:
    return points / np.linalg.norm(points, axis=1, keepdims=True)


def _cyclic(triples: list[tuple[float, float, float]]) -> np.ndarray:
    """All cyclic permutations of each triple (the even permutations)."""
    out = []
    for a, b, c in triples:
        out.extend([(a, b, c), (b, c, a), (c, a, b)])
    return np.array(out, dtype=float)


def _signed(base: tuple[float, float, float]) -> list[tuple[float, float, float]]:
    """Every sign pattern of the non-zero components, without duplicates."""
    choices = [(v, -v) if v != 0 else (0.0,) for v in base]
    return list(itertools.product(*choices))


@cache
def icosahedron_vertices() -> np.ndarray:
    """The 12 vertices, cyclic permutations of (0, ±1, ±φ) (edge length 2)."""
    return _cyclic(_signed((0.0, 1.0, PHI)))


@cache
def icosahedron_edges() -> tuple[tuple[int, int], ...]:
    verts = icosahedron_vertices()
    return tuple(
        (i, j)
        for i, j in itertools.combinations(range(len(verts)), 2)
        if abs(np.linalg.norm(verts[i] - verts[j]) - 2.0) < 1e-9
    )


@cache
def icosahedron_face_centres() -> np.ndarray:
    """Centroids of the 20 triangular faces (mutually adjacent vertex triples)."""
    verts = icosahedron_vertices()
    edges = set(icosahedron_edges())
    faces = [
        tri
        for tri in itertools.combinations(range(len(verts)), 3)
        if {(tri[0], tri[1]), (tri[0], tri[2]), (tri[1], tri[2])} <= edges
    ]
    return np.array([verts[list(tri)].mean(axis=0) for tri in faces])


@cache
def truncated_icosahedron_vertices() -> np.ndarray:
    """The 60 fullerene vertices: points at 1/3 and 2/3 of every icosahedron edge."""
    verts = icosahedron_vertices()
    points = []
    for i, j in icosahedron_edges():
        points.append(verts[i] + (verts[j] - verts[i]) / 3.0)
        points.append(verts[i] + 2.0 * (verts[j] - verts[i]) / 3.0)
    return np.array(points)


@cache
def _catalog(kind: PolyhedronKind) -> np.ndarray:
    if kind is PolyhedronKind.TETRAHEDRON:
        pts = np.array([(1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)], dtype=float)
    elif kind is PolyhedronKind.CUBE:
        pts = np.vstack([np.eye(3), -np.eye(3)])
    elif kind is PolyhedronKind.OCTAHEDRON:
        pts = np.array(list(itertools.product((1.0, -1.0), repeat=3)))
    elif kind is PolyhedronKind.DODECAHEDRON:
        # face normals of the dodecahedron are the icosahedron vertices (duality)
        pts = icosahedron_vertices()
    elif kind is PolyhedronKind.ICOSAHEDRON:
        pts = icosahedron_face_centres()
    elif kind is PolyhedronKind.FULLERENE:
        # 12 pentagons over the icosahedron vertices, 20 hexagons over its faces
        pts = np.vstack([icosahedron_vertices(), icosahedron_face_centres()])
    else:
        pts = truncated_icosahedron_vertices()
    out = _normalized(pts)
    out.setflags(write=False)
    return out


def face_array(kind: PolyhedronKind) -> np.ndarray:
    """Face directions as a read-only (m, 3) array."""
    return _catalog(kind)


def face_directions(kind: PolyhedronKind) -> list[Direction]:
    return [Direction(*map(float, row)) for row in _catalog(kind)]


def direction_to_qubit(u: Direction | RealVector) -> np.ndarray:
    """Bloch direction -> (cos θ/2, e^{iφ} sin θ/2); the south pole maps to (0, 1)."""
    x, y, z = (float(v) for v in u)
    norm = math.sqrt(x * x + y * y + z * z)
    x, y, z = x / norm, y / norm, z / norm
    if z <= -1.0:
        return np.array([0.0, 1.0], dtype=complex)
    theta = math.acos(max(-1.0, min(1.0, z)))
    phi = math.atan2(y, x)
    return np.array(
        [math.cos(theta / 2.0), complex(math.cos(phi), math.sin(phi)) * math.sin(theta / 2.0)],
        dtype=complex,
    )


def spherical_direction(theta: float, phi: float) -> Direction:
    """Unit vector for polar angle θ and azimuth φ (radians)."""
    st = math.sin(theta)
    return Direction(st * math.cos(phi), st * math.sin(phi), math.cos(theta))
