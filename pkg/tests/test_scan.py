"""Tests for the Bloch-sphere scan and the extremal search."""

import math

import numpy as np
import pytest

from engines import lossdist, protocol, scan
from exceptions import ContractError
from models import PolyhedronKind


def test_bloch_loss_at_edge_direction(tetra):
    assert scan.bloch_loss(tetra, math.pi / 2, 0.0) == pytest.approx(1.5, abs=1e-9)
    assert scan.bloch_loss(tetra, math.pi / 2, 0.0, n=1e4) == pytest.approx(1.5, rel=1e-9)


def _boundary_angles(p, j):
    """(θ, φ) of the state orthogonal to row j."""
    opposite = np.array([-p.X[j][1], p.X[j][0]])
    a, b = opposite / np.linalg.norm(opposite)
    return 2 * math.acos(min(1.0, abs(a))), float(np.angle(b) - np.angle(a))


def test_bloch_loss_offsets_boundary_states(tetra):
    value = scan.bloch_loss(tetra, *_boundary_angles(tetra, 0))
    assert math.isfinite(value)
    assert value >= 1.0


@pytest.mark.parametrize("j", range(4))
def test_bloch_loss_just_inside_boundary(tetra, j):
    theta, phi = _boundary_angles(tetra, j)
    toward_pole = -1.0 if theta < math.pi / 2 else 1.0
    for gap in (5e-8, 2e-8, 0.0):
        value = scan.bloch_loss(tetra, theta + toward_pole * gap, phi)
        assert 1.0 <= value <= 1.5


def test_scan_tetrahedron_grid_and_extremes():
    grid = scan.scan_bloch(PolyhedronKind.TETRAHEDRON, resolution=5.0)
    assert grid.values.shape == (36, 72)
    assert (grid.theta_steps, grid.phi_steps) == (36, 72)
    assert grid.theta_deg[0] == pytest.approx(2.5)
    assert grid.phi_deg[-1] == pytest.approx(357.5)
    assert grid.min == pytest.approx(1.0, abs=1e-5)
    assert grid.max == pytest.approx(1.5, abs=1e-4)
    assert grid.values.min() >= grid.min - 1e-12
    assert grid.values.max() <= grid.max + 1e-12


def test_scan_without_refinement_uses_grid(tetra):
    seen = []
    grid = scan.scan_bloch(PolyhedronKind.TETRAHEDRON, 10.0, refine=False, progress=seen.append)
    assert grid.min == grid.values.min()
    assert grid.max == grid.values.max()
    assert seen == list(range(18))
    theta, phi = grid.argmin
    assert scan.bloch_loss(tetra, theta, phi) == pytest.approx(grid.min)


def test_scan_is_deterministic():
    a = scan.scan_bloch(PolyhedronKind.CUBE, 10.0)
    b = scan.scan_bloch(PolyhedronKind.CUBE, 10.0)
    assert np.array_equal(a.values, b.values)
    assert (a.min, a.max) == (b.min, b.max)


@pytest.mark.parametrize("resolution", [0.05, 12.0])
def test_scan_resolution_range(resolution):
    with pytest.raises(ContractError):
        scan.scan_bloch(PolyhedronKind.TETRAHEDRON, resolution)


def test_extremal_loss_single_qubit(tetra):
    found = scan.extremal_loss(tetra, seed=4)
    assert found.l_min == pytest.approx(1.0, abs=1e-6)
    assert found.l_max == pytest.approx(1.5, abs=1e-5)
    assert found.certified
    assert 1 <= found.restarts <= 20
    assert lossdist.pure_state_loss(tetra, found.argmin.c[:, 0]) == pytest.approx(found.l_min)


def test_extremal_loss_independent_of_workers(tetra):
    serial = scan.extremal_loss(tetra, restarts=6, seed=2, workers=1)
    parallel = scan.extremal_loss(tetra, restarts=6, seed=2, workers=2)
    assert (serial.l_min, serial.l_max, serial.restarts) == (
        parallel.l_min, parallel.l_max, parallel.restarts
    )


def test_extremal_loss_needs_restarts(tetra):
    with pytest.raises(ContractError):
        scan.extremal_loss(tetra, restarts=0)


@pytest.mark.slow
@pytest.mark.parametrize(
    "kind,expected",
    [
        (PolyhedronKind.CUBE, 1.125),
        (PolyhedronKind.OCTAHEDRON, 1.125),
        (PolyhedronKind.DODECAHEDRON, 36 / 35),
        (PolyhedronKind.ICOSAHEDRON, 45 / 44),
    ],
)
def test_scan_maximum_of_regular_solids(kind, expected):
    grid = scan.scan_bloch(kind, resolution=2.0)
    assert grid.min == pytest.approx(1.0, abs=1e-6)
    assert grid.max == pytest.approx(expected, abs=1e-4)


@pytest.mark.slow
def test_two_qubit_tetrahedron_extremes():
    p = protocol.polyhedron_protocol(PolyhedronKind.TETRAHEDRON, 2)
    found = scan.extremal_loss(p, seed=0)
    assert found.l_min == pytest.approx(3.0, abs=1e-4)
    assert found.l_max == pytest.approx(4.442971458, abs=1e-3)


@pytest.mark.slow
def test_scan_pentakis_dodecahedron_maximum():
    grid = scan.scan_bloch(PolyhedronKind.PENTAKIS_DODECAHEDRON, resolution=3.0)
    assert grid.min == pytest.approx(1.0, abs=1e-6)
    assert grid.max == pytest.approx(1.0041037, abs=1e-5)


@pytest.mark.slow
def test_scan_fullerene_maximum():
    grid = scan.scan_bloch(PolyhedronKind.FULLERENE, resolution=3.0)
    assert grid.min == pytest.approx(1.0, abs=1e-6)
    assert 1.0042 <= grid.max <= 1.0044


@pytest.mark.slow
@pytest.mark.parametrize(
    "kind,expected,tol",
    [(PolyhedronKind.OCTAHEDRON, 3.4708, 1e-3), (PolyhedronKind.DODECAHEDRON, 3.42, 0.01)],
)
def test_two_qubit_extremes(kind, expected, tol):
    found = scan.extremal_loss(protocol.polyhedron_protocol(kind, 2), seed=0)
    assert found.l_min == pytest.approx(3.0, abs=1e-6)
    assert found.l_max == pytest.approx(expected, abs=tol)


@pytest.mark.slow
@pytest.mark.parametrize(
    "kind,expected", [(PolyhedronKind.TETRAHEDRON, 10.4), (PolyhedronKind.OCTAHEDRON, 7.9)]
)
def test_three_qubit_extremes(kind, expected):
    found = scan.extremal_loss(protocol.polyhedron_protocol(kind, 3), seed=0)
    assert found.l_min == pytest.approx(7.0, abs=1e-5)
    assert found.l_max == pytest.approx(expected, abs=0.1)
