"""Tests for the polyhedron catalog."""

import math

import numpy as np
import pytest

from engines import geometry
from models import PolyhedronKind


@pytest.mark.parametrize("kind", list(PolyhedronKind))
def test_face_count_and_unit_normals(kind):
    faces = geometry.face_array(kind)
    assert faces.shape == (kind.faces, 3)
    assert np.allclose(np.linalg.norm(faces, axis=1), 1.0)


@pytest.mark.parametrize("kind", list(PolyhedronKind))
def test_normals_are_distinct_and_balanced(kind):
    faces = geometry.face_array(kind)
    gaps = np.linalg.norm(faces[:, None, :] - faces[None, :, :], axis=2)
    assert np.all(gaps[~np.eye(len(faces), dtype=bool)] > 1e-6)
    assert np.allclose(faces.sum(axis=0), 0.0, atol=1e-12)


def test_icosahedron_structure():
    assert len(geometry.icosahedron_vertices()) == 12
    assert len(geometry.icosahedron_edges()) == 30
    assert len(geometry.icosahedron_face_centres()) == 20
    assert len(geometry.truncated_icosahedron_vertices()) == 60


def test_face_array_is_read_only():
    faces = geometry.face_array(PolyhedronKind.CUBE)
    with pytest.raises(ValueError):
        faces[0, 0] = 2.0


def test_direction_to_qubit_poles():
    assert np.allclose(geometry.direction_to_qubit((0.0, 0.0, 1.0)), [1.0, 0.0])
    assert np.allclose(geometry.direction_to_qubit((0.0, 0.0, -1.0)), [0.0, 1.0])


@pytest.mark.parametrize("theta,phi", [(0.3, 0.1), (1.2, 2.5), (2.9, -1.0)])
def test_qubit_bloch_vector_matches_direction(theta, phi):
    u = geometry.spherical_direction(theta, phi)
    psi = geometry.direction_to_qubit(u)
    a, b = psi
    bloch = (2 * (a.conjugate() * b).real, 2 * (a.conjugate() * b).imag, abs(a) ** 2 - abs(b) ** 2)
    assert np.allclose(bloch, u.as_array())


def test_face_directions_are_named_tuples():
    dirs = geometry.face_directions(PolyhedronKind.TETRAHEDRON)
    assert len(dirs) == 4
    assert dirs[0].z == pytest.approx(1 / math.sqrt(3))
