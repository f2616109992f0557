"""Shared test fixtures for polytomo."""

import sys
from pathlib import Path

# Ensure project root is on path
sys.path.insert(0, str(Path(__file__).parent.parent))

import json
import math

import numpy as np
import pytest

from engines import geometry, protocol, states
from models import PolyhedronKind


@pytest.fixture
def tetra():
    """Single-qubit tetrahedron protocol."""
    return protocol.single_qubit_protocol(PolyhedronKind.TETRAHEDRON)


@pytest.fixture
def cube():
    return protocol.single_qubit_protocol(PolyhedronKind.CUBE)


@pytest.fixture
def dodeca():
    return protocol.single_qubit_protocol(PolyhedronKind.DODECAHEDRON)


@pytest.fixture
def tetra2():
    """Two-qubit tetrahedron protocol (16 rows)."""
    return protocol.polyhedron_protocol(PolyhedronKind.TETRAHEDRON, 2)


@pytest.fixture
def edge_state():
    """Pure qubit along +x, an edge-midpoint direction of the tetrahedron."""
    return geometry.direction_to_qubit(geometry.spherical_direction(math.pi / 2, 0.0))


@pytest.fixture
def pure_qubit():
    return states.random_pure(2, seed=3)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def write_config(tmp_path):
    """Write an experiment config JSON into tmp_path and return its path."""
    def _write(name, **fields):
        path = tmp_path / f"{name}.json"
        path.write_text(json.dumps(fields), encoding="utf-8")
        return path

    return _write
