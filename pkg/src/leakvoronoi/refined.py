"""
Refined Voronoi diagrams of order d.

The cell ``V_t`` of an ordered index tuple ``t = (i_1, ..., i_d)`` holds the
points whose nearest site is ``p_{i_1}``, second nearest ``p_{i_2}``, and so
on. Diagrams are built recursively: the cell ``V_(t, j)`` is the intersection
of ``V_t`` with the classic cell of ``j`` among the sites not in ``t``, and its
halfplane set is the union of the two halfplane sets (redundant halfplanes
are kept).

Most tuples of a diagram have an empty cell. Emptiness is decided exactly by
computing the radius of the largest disk inscribed in the cell (a small
linear program); cells whose inscribed radius does not exceed
``EMPTY_TOL * scale`` are flagged empty but kept in the map.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np
from numpy.typing import ArrayLike
from scipy.optimize import linprog

from .geometry import (
    CellPolyhedron,
    SiteSet,
    as_xy,
    cell_contains,
    cell_contains_many,
    validate_general_position,
    voronoi_cells_for,
    voronoi_diagram,
)

#: A cell is empty when its largest inscribed disk has radius <= EMPTY_TOL * scale.
EMPTY_TOL = 1e-9

EMPTINESS_METHOD = "exact inscribed-disk LP"


def inscribed_radius(cell: CellPolyhedron, cap: float) -> float:
    """Radius of the largest disk inside ``cell``, capped at ``cap``.

    Negative when the halfplanes have no common point. The LP maximiser is
    re-evaluated directly so the value does not inherit solver tolerances.
    """
    if not cell.halfplanes:
        return cap
    A, b = cell.normals, cell.offsets
    m = len(b)
    # maximise r  s.t.  <a_i, y> - r >= b_i,  r <= cap
    res = linprog(
        c=[0.0, 0.0, -1.0],
        A_ub=np.column_stack([-A, np.ones(m)]),
        b_ub=-b,
        bounds=[(None, None), (None, None), (None, cap)],
        method="highs",
    )
    if res.status != 0:
        raise RuntimeError(f"inscribed-disk LP failed: {res.message}")
    y = res.x[:2]
    return float(min(cap, np.min(A @ y - b)))


@dataclass(frozen=True)
class RefinedDiagram:
    """Cells ``V_t`` for every ordered ``d``-tuple ``t`` of distinct site indices."""

    sites: SiteSet
    order: int
    cells: dict[tuple[int, ...], CellPolyhedron] = field(repr=False)
    empty: dict[tuple[int, ...], bool] = field(repr=False)
    empty_tol: float = EMPTY_TOL
    emptiness_method: str = EMPTINESS_METHOD

    def __len__(self):
        return len(self.cells)

    def __iter__(self) -> Iterator[tuple[int, ...]]:
        return iter(self.cells)

    def cell(self, t: tuple[int, ...]) -> CellPolyhedron:
        return self.cells[tuple(t)]

    def is_empty(self, t: tuple[int, ...]) -> bool:
        return self.empty[tuple(t)]

    def nonempty_labels(self) -> list[tuple[int, ...]]:
        return [t for t in self.cells if not self.empty[t]]

    def empty_labels(self) -> list[tuple[int, ...]]:
        return [t for t in self.cells if self.empty[t]]


def _emptiness(cell: CellPolyhedron, scale: float) -> bool:
    return inscribed_radius(cell, cap=scale) <= EMPTY_TOL * scale


def order_one(sites: SiteSet) -> RefinedDiagram:
    """The order-1 refined diagram, i.e. the classic diagram keyed by 1-tuples."""
    vd = voronoi_diagram(sites)
    cells = {(i,): vd.cells[i] for i in range(len(sites))}
    return RefinedDiagram(sites, 1, cells, {t: False for t in cells})


def refine_once(diagram: RefinedDiagram, sites: SiteSet | None = None) -> RefinedDiagram:
    """Order ``d`` to order ``d + 1``: intersect every ``V_t`` with the reduced cells."""
    sites = diagram.sites if sites is None else sites
    k = len(sites)
    d = diagram.order
    if d >= k:
        raise ValueError(f"cannot refine an order-{d} diagram of {k} sites")
    pts = sites.coords
    scale = sites.scale

    cells: dict[tuple[int, ...], CellPolyhedron] = {}
    empty: dict[tuple[int, ...], bool] = {}
    for t, parent in diagram.cells.items():
        rest = [m for m in range(k) if m not in t]
        reduced = voronoi_cells_for(pts[rest], rest)
        for j in rest:
            child = CellPolyhedron(parent.halfplanes + reduced[j].halfplanes, t + (j,))
            cells[child.label] = child
            # a subset of an empty cell is empty
            empty[child.label] = diagram.empty[t] or _emptiness(child, scale)
    return RefinedDiagram(sites, d + 1, cells, empty)


def refined_diagram(sites: SiteSet | ArrayLike, d: int) -> RefinedDiagram:
    """Refined Voronoi diagram of order ``d`` (``1 <= d <= k``)."""
    if not isinstance(sites, SiteSet):
        sites = SiteSet(sites)
    validate_general_position(sites)
    if not 1 <= d <= len(sites):
        raise ValueError(f"order must lie in [1, {len(sites)}], got {d}")
    diagram = order_one(sites)
    while diagram.order < d:
        diagram = refine_once(diagram, sites)
    return diagram


def locate_ordered(sites: SiteSet | ArrayLike, y: ArrayLike, d: int) -> tuple[int, ...]:
    """Indices of the ``d`` nearest sites in ascending distance, ties to lower index."""
    pts = sites.coords if isinstance(sites, SiteSet) else np.asarray(sites, dtype=float)
    dist = np.hypot(*(pts - as_xy(y)).T)
    return tuple(int(i) for i in np.argsort(dist, kind="stable")[:d])


def locate_ordered_many(sites: SiteSet | ArrayLike, ys: ArrayLike, d: int) -> np.ndarray:
    """Vectorised :func:`locate_ordered`; returns an ``(n, d)`` index array."""
    pts = sites.coords if isinstance(sites, SiteSet) else np.asarray(sites, dtype=float)
    ys = np.asarray(ys, dtype=float).reshape(-1, 2)
    dist = np.linalg.norm(ys[:, None, :] - pts[None, :, :], axis=2)
    return np.argsort(dist, axis=1, kind="stable")[:, :d]


@dataclass(frozen=True)
class PairRegion:
    """Union ``V_(i,j) ∪ V_(j,i)``: the 2-nearest region of the unordered pair ``{i, j}``."""

    cells: tuple[CellPolyhedron, CellPolyhedron]

    @property
    def pair(self) -> frozenset[int]:
        return frozenset(self.cells[0].label)

    def contains(self, y: ArrayLike, slack: float = 0.0) -> bool:
        return any(cell_contains(c, y, slack) for c in self.cells)

    def contains_many(self, ys: ArrayLike, slack: float = 0.0) -> np.ndarray:
        return cell_contains_many(self.cells[0], ys, slack) | cell_contains_many(
            self.cells[1], ys, slack
        )


def merge_pair(diagram: RefinedDiagram, i: int, j: int) -> PairRegion:
    if diagram.order != 2:
        raise ValueError("pair merging needs an order-2 diagram")
    return PairRegion((diagram.cell((i, j)), diagram.cell((j, i))))


def ordered_tuples(k: int, d: int) -> list[tuple[int, ...]]:
    """All ``k! / (k-d)!`` ordered ``d``-tuples without repetition, lexicographic."""
    return list(itertools.permutations(range(k), d))
