"""
Acceptance gate. Each test records one PASS/FAIL/SKIP line that is printed
in the terminal summary; run with ``pytest tests/test_acceptance.py -v``.
"""
from __future__ import annotations

import time
from pathlib import Path

import numpy as np
import pytest

from conftest import ACCEPTANCE, random_sites
from leakvoronoi.data_io import load_dataset, load_setup
from leakvoronoi.evaluation import (
    clean_outliers,
    evaluate_multi_leak,
    evaluate_single_leak,
    invalid_prediction_analysis,
)
from leakvoronoi.geometry import (
    CellPolyhedron,
    HalfPlane,
    Point,
    SiteSet,
    cell_contains,
    cell_contains_many,
    clip_to_surface,
    voronoi_diagram,
)
from leakvoronoi.models import Dataset, Sample, SetupConfig
from leakvoronoi.predictors import ClassicPredictor, RefinedPredictor
from leakvoronoi.projection import dykstra_project, kkt_residual, project_halfplane
from leakvoronoi.refined import merge_pair, refined_diagram
from leakvoronoi.synthesis import FlowModel, generate_dataset

MARGIN = 1e-7
SLACK = 1e-9
N_QUERY = 10_000
REAL_DATA = Path(__file__).resolve().parent / "data" / "wing"


def record(n: int, ok: bool, detail: str) -> None:
    ACCEPTANCE[n] = ("PASS" if ok else "FAIL", detail)
    print(f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
    assert ok, detail


def _sorted_dist(sites: np.ndarray, ys: np.ndarray):
    dist = np.linalg.norm(ys[:, None, :] - sites[None, :, :], axis=2)
    order = np.argsort(dist, axis=1, kind="stable")
    return order, np.take_along_axis(dist, order, axis=1)


# ---------------------------------------------------------------------------
# 1. classic membership vs sorted-distance oracle
# ---------------------------------------------------------------------------


def test_criterion_1_classic_oracle():
    rng = np.random.default_rng(101)
    instances = [(random_sites(rng, int(rng.integers(3, 11))), rng.uniform(0, 1, (N_QUERY, 2))) for _ in range(50)]
    disagreements = checked = 0
    t0 = time.perf_counter()
    for sites, ys in instances:
        vd = voronoi_diagram(sites)
        order, dist = _sorted_dist(sites.coords, ys)
        keep = dist[:, 1] - dist[:, 0] > MARGIN
        member = np.stack([cell_contains_many(c, ys, SLACK) for c in vd.cells], axis=1)
        expected = np.zeros_like(member)
        expected[np.arange(len(ys)), order[:, 0]] = True
        disagreements += int(np.any(member[keep] != expected[keep], axis=1).sum())
        checked += int(keep.sum())
    elapsed = time.perf_counter() - t0
    record(1, disagreements == 0 and elapsed < 2.0,
           f"{disagreements} disagreements over {checked} points, {elapsed:.2f} s (limit 2 s)")


# ---------------------------------------------------------------------------
# 2. order-1 refined diagram equals the classic diagram
# ---------------------------------------------------------------------------


def _normalized(cell: CellPolyhedron) -> set:
    return {(round(h.normal[0], 9), round(h.normal[1], 9), round(h.offset, 9)) for h in cell.halfplanes}


def test_criterion_2_order_one_is_classic():
    rng = np.random.default_rng(202)
    mismatches = 0
    for _ in range(20):
        sites = random_sites(rng, int(rng.integers(3, 11)))
        vd = voronoi_diagram(sites)
        rvd = refined_diagram(sites, 1)
        for i, cell in enumerate(vd.cells):
            if rvd.is_empty((i,)) or _normalized(rvd.cell((i,))) != _normalized(cell):
                mismatches += 1
    record(2, mismatches == 0, f"{mismatches} mismatched cells over 20 instances")


# ---------------------------------------------------------------------------
# 3. order-2 ordered oracle and pair merge
# ---------------------------------------------------------------------------


def test_criterion_3_order_two_oracle_and_merge():
    rng = np.random.default_rng(303)
    ordered_bad = merged_bad = checked = 0
    for _ in range(50):
        sites = random_sites(rng, int(rng.integers(3, 11)))
        k = len(sites)
        ys = rng.uniform(0, 1, (N_QUERY, 2))
        rvd = refined_diagram(sites, 2)
        order, dist = _sorted_dist(sites.coords, ys)
        gaps = np.diff(dist[:, : min(3, k)], axis=1)
        keep = np.all(gaps > MARGIN, axis=1)
        checked += int(keep.sum())

        labels = rvd.nonempty_labels()
        member = np.stack([cell_contains_many(rvd.cell(t), ys, SLACK) for t in labels], axis=1)
        expected = np.array([[tuple(o[:2]) == t for t in labels] for o in order[:, :2]])
        ordered_bad += int(np.any(member[keep] != expected[keep], axis=1).sum())

        for i in range(k):
            for j in range(i + 1, k):
                region = merge_pair(rvd, i, j).contains_many(ys, SLACK)
                want = np.array([set(o[:2]) == {i, j} for o in order])
                merged_bad += int((region[keep] != want[keep]).sum())
    record(3, ordered_bad == 0 and merged_bad == 0,
           f"{ordered_bad} ordered and {merged_bad} merged disagreements over {checked} points")


# ---------------------------------------------------------------------------
# 4. Dykstra projection
# ---------------------------------------------------------------------------


def _boundary_oracle(y: np.ndarray, cell: CellPolyhedron, sites: np.ndarray, step: float = 2e-4) -> float:
    """Brute force: densely sample the boundary of the cell clipped to a box
    large enough that the box edges cannot hold the nearest point."""
    if cell_contains(cell, y, SLACK):
        return 0.0
    reach = np.hypot(*(sites[cell.label[0]] - y))  # the site lies in its own cell
    box = np.array([[-1, -1], [1, -1], [1, 1], [-1, 1]]) * (2 * reach + 1) + y
    poly = clip_to_surface(cell, box)
    best = np.inf
    for a, b in zip(poly, np.roll(poly, -1, axis=0)):
        n = max(2, int(np.ceil(np.hypot(*(b - a)) / step)) + 1)
        t = np.linspace(0, 1, n)[:, None]
        pts = a + t * (b - a)
        best = min(best, float(np.hypot(*(pts - y).T).min()))
    return best


def test_criterion_4_dykstra():
    rng = np.random.default_rng(404)
    halfplane_err = 0.0
    for _ in range(1000):
        theta = rng.uniform(0, 2 * np.pi)
        h = HalfPlane((float(np.cos(theta)), float(np.sin(theta))), float(rng.normal()))
        y = rng.normal(size=2) * 3
        a, b = np.array(h.normal), h.offset
        closed = y + max(0.0, b - a @ y) * a
        got = project_halfplane(y, h)
        single = dykstra_project(y, CellPolyhedron((h,), (0,))).point.as_array()
        halfplane_err = max(halfplane_err, float(np.abs(got - closed).max()), float(np.abs(single - closed).max()))

    worst = 0.0
    kkt_bad = idem_bad = converged = 0
    for _ in range(200):
        sites = random_sites(rng, int(rng.integers(3, 11)))
        vd = voronoi_diagram(sites)
        cell = vd.cells[int(rng.integers(len(sites)))]
        lo, hi = sites.coords.min(axis=0), sites.coords.max(axis=0)
        pad = 0.25 * (hi - lo)
        y = rng.uniform(lo - pad, hi + pad)
        res = dykstra_project(y, cell)
        dist = 0.0 if cell_contains(cell, y, SLACK) else res.distance
        worst = max(worst, abs(dist - _boundary_oracle(y, cell, sites.coords)))
        if res.converged:
            converged += 1
            again = dykstra_project(res.point.as_array(), cell).point.as_array()
            idem_bad += int(np.hypot(*(again - res.point.as_array())) > 1e-9)
            kkt_bad += int(kkt_residual(y, cell, res.point.as_array()) > 1e-6)

    ok = halfplane_err <= 1e-12 and worst <= 1e-3 and kkt_bad == 0 and idem_bad == 0
    record(4, ok,
           f"halfplane max error {halfplane_err:.1e} m; oracle max error {worst:.1e} m on 200 pairs; "
           f"{converged} converged, {idem_bad} idempotence and {kkt_bad} KKT failures")


# ---------------------------------------------------------------------------
# 5. synthetic end to end
# ---------------------------------------------------------------------------


def test_criterion_5_synthetic_end_to_end(wing_setup):
    vd = voronoi_diagram(wing_setup.connections)
    clean = evaluate_single_leak(generate_dataset(wing_setup, 500, 0, FlowModel(2.0, 0.0), seed=5), ClassicPredictor(vd))
    noisy = evaluate_single_leak(generate_dataset(wing_setup, 600, 0, FlowModel(2.0, 0.05), seed=5), ClassicPredictor(vd))
    m0, m1 = clean.metrics, noisy.metrics
    ok = (
        m0.accuracy == 1.0
        and m0.mean_dist_full == 0.0
        and m0.mean_dist_incorrect == 0.0
        and m1.n_samples >= 500
        and m1.accuracy >= 0.95
    )
    record(5, ok,
           f"sigma=0: accuracy {m0.accuracy:.3f}, distances {m0.mean_dist_full_cm:.2f}/{m0.mean_dist_incorrect_cm:.2f} cm; "
           f"sigma=0.05: accuracy {m1.accuracy:.4f} on {m1.n_samples} samples (bound 0.95)")


# ---------------------------------------------------------------------------
# 6. cleaning semantics
# ---------------------------------------------------------------------------


def test_criterion_6_cleaning():
    # V_1 is the halfplane y1 <= 5, so a leak at (5 + d, y2) sits d meters from it
    setup = SetupConfig(
        "strip",
        (Point(0, 0), Point(20, 0), Point(20, 10), Point(0, 10)),
        SiteSet([(2.0, 5.0), (8.0, 5.0), (18.0, 9.3)]),
    )
    vd = voronoi_diagram(setup.connections)
    big = (1.0, 0.1, 0.01)  # connection 1 carries the largest flow
    far = Sample(1, big, (Point(7.1, 5.0),))
    near = Sample(2, big, (Point(6.9, 5.0),))
    inside = Sample(3, (0.1, 1.0, 0.01), (Point(8.0, 4.0),))
    two = (
        Sample(10, big, (Point(7.1, 5.0), Point(6.9, 5.0)), (1, 2)),  # links the far sample
        Sample(11, big, (Point(6.9, 5.0), Point(8.0, 4.0)), (2, 3)),
        Sample(12, (0.1, 1.0, 0.01), (Point(8.0, 4.0), Point(7.1, 5.0)), (3, 1)),  # links the far sample
    )
    data = Dataset(setup, (far, near, inside), two)
    cleaned, rep = clean_outliers(data, vd, 2.0)
    d_far = rep.single[0][1] if rep.single else None
    ok = (
        [i for i, _ in rep.single] == [1]
        and [s.id for s in cleaned.single] == [2, 3]
        and sorted(rep.cascade) == [10, 12]
        and not rep.two_leak
        and [s.id for s in cleaned.two_leak] == [11]
        and d_far is not None
        and abs(d_far - 2.1) < 1e-9
    )
    record(6, ok, f"removed single {[i for i, _ in rep.single]} (distance {d_far}), cascade {sorted(rep.cascade)}")


# ---------------------------------------------------------------------------
# 7. reproduction of the published results (only when the wing data is supplied)
# ---------------------------------------------------------------------------


def _close(value: float, target: float, tol: float = 0.05) -> bool:
    return abs(value - target) <= tol + 1e-9


def test_criterion_7_published_results():
    setup_file, data_file = REAL_DATA / "setup.txt", REAL_DATA / "dataset.csv"
    if not (setup_file.exists() and data_file.exists()):
        ACCEPTANCE[7] = ("SKIP", f"published wing data not supplied (expected {setup_file.name} and {data_file.name} in {REAL_DATA})")
        pytest.skip("published wing dataset and connection coordinates are not available")

    setup = load_setup(setup_file)
    data = load_dataset(data_file, setup)
    vd = voronoi_diagram(setup.connections)
    classic = ClassicPredictor(vd)
    refined = RefinedPredictor(refined_diagram(setup.connections, 2))
    cleaned, _ = clean_outliers(data, vd)

    c1, r1 = evaluate_single_leak(cleaned, classic).metrics, evaluate_single_leak(cleaned, refined).metrics
    c2, r2 = evaluate_multi_leak(cleaned, classic), evaluate_multi_leak(cleaned, refined)
    inv = invalid_prediction_analysis(cleaned, refined, vd)
    checks = {
        "counts": (len(data.single), len(cleaned.single), len(data.two_leak), len(cleaned.two_leak)) == (413, 408, 440, 432),
        "table1 classic": _close(100 * c1.accuracy, 91.67) and _close(c1.mean_dist_full_cm, 1.71) and _close(c1.mean_dist_incorrect_cm, 20.58),
        "table1 refined": _close(100 * r1.accuracy, 74.75) and _close(r1.mean_dist_full_cm, 6.13) and _close(r1.mean_dist_incorrect_cm, 25.23),
        "table2 classic": _close(100 * c2.step1.accuracy, 93.06) and c2.step2 is not None and _close(100 * c2.step2.accuracy, 88.31),
        "table2 refined": _close(100 * r2.step1.accuracy, 33.80) and r2.step2 is not None and _close(100 * r2.step2.accuracy, 71.23),
        "invalid": inv.total == 169 and (inv.breakdown["both"], inv.breakdown["first_only"], inv.breakdown["second_only"]) == (144, 20, 5),
        "cells": inv.n_nonempty == 34 and len(inv.histogram) == 50,
    }
    failed = [k for k, v in checks.items() if not v]
    meeting = sum(len(clip_to_surface(refined.diagram.cell(t), setup.surface_array)) > 0 for t in refined.labels())
    observed = (
        f"counts {len(data.single)}/{len(cleaned.single)} {len(data.two_leak)}/{len(cleaned.two_leak)}; "
        f"T1 classic {100 * c1.accuracy:.2f}% {c1.mean_dist_full_cm:.2f}/{c1.mean_dist_incorrect_cm:.2f} cm, "
        f"refined {100 * r1.accuracy:.2f}% {r1.mean_dist_full_cm:.2f}/{r1.mean_dist_incorrect_cm:.2f} cm; "
        f"T2 classic {100 * c2.step1.accuracy:.2f}%, refined {100 * r2.step1.accuracy:.2f}%; "
        f"invalid {inv.total} {inv.breakdown}; cells {inv.n_nonempty} ({meeting} meet the surface), "
        f"{len(inv.histogram)} invalid categories"
    )
    record(7, not failed, observed if not failed else f"mismatches {failed}: {observed}")
