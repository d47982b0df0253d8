import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_sites
from leakvoronoi.geometry import CellPolyhedron, HalfPlane, cell_contains, voronoi_diagram
from leakvoronoi.projection import (
    MAX_ITERS,
    distance_to_cell,
    dykstra_project,
    kkt_residual,
    project_halfplane,
)
from leakvoronoi.refined import refined_diagram

LEFT_OF_ONE = HalfPlane((-1.0, 0.0), -1.0)  # {y1 <= 1}
S = 1 / np.sqrt(2)
WEDGE = CellPolyhedron((HalfPlane((-S, -S), 0.0), HalfPlane((-S, S), 0.0)), (0,))  # y1+y2<=0, y1-y2<=0


def test_halfplane_closed_form():
    assert project_halfplane((2, 3), LEFT_OF_ONE).tolist() == [1.0, 3.0]
    assert project_halfplane((0.5, 3), LEFT_OF_ONE).tolist() == [0.5, 3.0]


@settings(max_examples=300, deadline=None)
@given(st.floats(0, 2 * np.pi), st.floats(-50, 50), st.floats(-100, 100), st.floats(-100, 100))
def test_halfplane_projection_feasible(theta, b, y1, y2):
    h = HalfPlane((float(np.cos(theta)), float(np.sin(theta))), b)
    z = project_halfplane((y1, y2), h)
    assert h.value(z) >= -1e-13 * max(1.0, abs(b), abs(y1), abs(y2))


def test_inside_point_is_fixed():
    res = dykstra_project((0.0, 0.0), CellPolyhedron((LEFT_OF_ONE,), (0,)))
    assert res.point.as_array().tolist() == [0.0, 0.0]
    assert res.distance == 0.0 and res.iterations_used <= 1 and res.converged


def test_single_halfplane():
    res = dykstra_project((2, 3), CellPolyhedron((LEFT_OF_ONE,), (0,)))
    assert res.point.as_array().tolist() == [1.0, 3.0] and res.distance == 1.0 and res.converged


def test_wedge_apex():
    res = dykstra_project((2, 0), WEDGE)
    assert np.allclose(res.point.as_array(), [0, 0], atol=1e-12)
    assert res.distance == pytest.approx(2.0)


def test_distance_to_cell():
    cell = CellPolyhedron((LEFT_OF_ONE,), (0,))
    assert distance_to_cell((3, 0), cell) == 2.0
    assert distance_to_cell((1 + 5e-10, 0), cell) == 0.0
    assert distance_to_cell((-4, 7), cell) == 0.0


def test_empty_halfplane_list():
    res = dykstra_project((4, 5), CellPolyhedron((), (0,)))
    assert res.distance == 0.0 and res.converged


def test_budget_is_reported_not_hidden():
    # a thin wedge makes alternating projections slow
    eps = 1e-3
    a = np.array([np.sin(eps), -np.cos(eps)])
    cell = CellPolyhedron((HalfPlane((0.0, 1.0), 0.0), HalfPlane(tuple(a / np.linalg.norm(a)), 0.0)), (0,))
    res = dykstra_project((-1.0, 5.0), cell, max_iters=3)  # projects onto the apex
    assert res.iterations_used == 3 and not res.converged
    assert MAX_ITERS == 100


def test_properties_on_classic_cells(rng):
    for _ in range(30):
        sites = random_sites(rng, int(rng.integers(3, 9)))
        cell = voronoi_diagram(sites).cells[0]
        y, y2 = rng.uniform(-1, 2, (2, 2))
        r1, r2 = dykstra_project(y, cell), dykstra_project(y2, cell)
        for r, q in ((r1, y), (r2, y2)):
            if r.converged:
                z = r.point.as_array()
                assert cell_contains(cell, z, 1e-6)
                assert kkt_residual(q, cell, z) < 1e-6
                assert np.hypot(*(dykstra_project(z, cell).point.as_array() - z)) < 1e-9
                assert r.distance == pytest.approx(np.hypot(*(q - z)))
        if r1.converged and r2.converged:
            gap = np.hypot(*(r1.point.as_array() - r2.point.as_array()))
            assert gap <= np.hypot(*(y - y2)) + 1e-9


def test_refined_cells_with_extended_budget(rng):
    """Refined cells may be narrow; converged runs still satisfy KKT."""
    sites = random_sites(rng, 8)
    rvd = refined_diagram(sites, 2)
    for t in rvd.nonempty_labels()[:15]:
        y = rng.uniform(-0.5, 1.5, 2)
        res = dykstra_project(y, rvd.cell(t), max_iters=20_000)
        if res.converged:
            assert kkt_residual(y, rvd.cell(t), res.point.as_array()) < 1e-6
