"""
Classic Voronoi diagrams in the plane, built from the Delaunay triangulation.

Cells are kept in halfplane (H-) representation: each cell ``V_i`` is the
intersection of the bisector halfplanes ``{y | <a_ij, y> >= b_ij}`` over the
Delaunay neighbours ``j`` of site ``i``. Cells are never clipped to a surface
except for rendering and area computations (:func:`clip_to_surface`).

Site indices are 0-based throughout the library; reports and files convert to
the 1-based connection numbering at the boundary.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.spatial import ConvexHull

from .errors import DegenerateSites

#: Relative tolerance used by the general-position checks.
GENERAL_POSITION_TOL = 1e-9


@dataclass(frozen=True)
class Point:
    """A position on the surface, in meters."""

    y1: float
    y2: float

    def __post_init__(self):
        if not (math.isfinite(self.y1) and math.isfinite(self.y2)):
            raise ValueError(f"non-finite point coordinates ({self.y1}, {self.y2})")

    def __iter__(self):
        yield self.y1
        yield self.y2

    def as_array(self) -> NDArray[np.float64]:
        return np.array([self.y1, self.y2], dtype=float)


def as_xy(y: ArrayLike) -> NDArray[np.float64]:
    """Coerce a point-like (``Point``, tuple, array) to a float array of shape (2,)."""
    arr = np.asarray(tuple(y) if isinstance(y, Point) else y, dtype=float)
    if arr.shape != (2,):
        raise ValueError(f"expected a 2D point, got shape {arr.shape}")
    return arr


def _readonly(arr: NDArray) -> NDArray:
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


def bbox_diagonal(points: ArrayLike) -> float:
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        return 0.0
    return float(np.hypot(*(pts.max(axis=0) - pts.min(axis=0))))


class SiteSet:
    """Ordered vacuum-connection positions ``p_1..p_k`` (stored 0-based).

    Construction validates finiteness and shape only; general position is
    checked by :func:`validate_general_position`, which every diagram
    builder calls.
    """

    __slots__ = ("_coords",)

    def __init__(self, points: ArrayLike):
        coords = np.asarray(
            [tuple(p) if isinstance(p, Point) else p for p in points], dtype=float
        )
        if coords.ndim != 2 or coords.shape[1] != 2:
            raise ValueError(f"sites must have shape (k, 2), got {coords.shape}")
        if not np.all(np.isfinite(coords)):
            raise ValueError("site coordinates must be finite")
        self._coords = _readonly(coords)

    @property
    def coords(self) -> NDArray[np.float64]:
        return self._coords

    def __len__(self) -> int:
        return len(self._coords)

    def __getitem__(self, i: int) -> Point:
        return Point(float(self._coords[i, 0]), float(self._coords[i, 1]))

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    def __eq__(self, other):
        return isinstance(other, SiteSet) and np.array_equal(self._coords, other._coords)

    def __hash__(self):
        return hash(self._coords.tobytes())

    def __repr__(self):
        return f"SiteSet({self._coords.tolist()!r})"

    @property
    def scale(self) -> float:
        """Bounding-box diagonal, the reference length for all tolerances."""
        return bbox_diagonal(self._coords)


# ---------------------------------------------------------------------------
# General position
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GeneralPositionReport:
    """Offending index sets found by :func:`general_position_report`."""

    duplicates: tuple[tuple[int, int], ...] = ()
    collinear: tuple[tuple[int, int, int], ...] = ()
    cocircular: tuple[tuple[int, int, int, int], ...] = ()

    @property
    def ok(self) -> bool:
        return not (self.duplicates or self.collinear or self.cocircular)

    def describe(self, limit: int = 5) -> str:
        parts = []
        for name, sets in (
            ("coincident", self.duplicates),
            ("collinear", self.collinear),
            ("cocircular", self.cocircular),
        ):
            if sets:
                shown = ", ".join(
                    "(" + ",".join(str(i + 1) for i in s) + ")" for s in sets[:limit]
                )
                more = f" and {len(sets) - limit} more" if len(sets) > limit else ""
                parts.append(f"{name} sites {shown}{more}")
        return "; ".join(parts) if parts else "general position"


def orient2d(a: ArrayLike, b: ArrayLike, c: ArrayLike) -> NDArray[np.float64]:
    """Twice the signed area of triangle ``abc`` (positive if counterclockwise).

    Broadcasts over leading axes.
    """
    a, b, c = (np.asarray(v, dtype=float) for v in (a, b, c))
    return (b[..., 0] - a[..., 0]) * (c[..., 1] - a[..., 1]) - (
        b[..., 1] - a[..., 1]
    ) * (c[..., 0] - a[..., 0])


def incircle(a: ArrayLike, b: ArrayLike, c: ArrayLike, d: ArrayLike) -> NDArray[np.float64]:
    """Incircle determinant; positive iff ``d`` is inside the circle through
    counterclockwise ``a, b, c``. Broadcasts over leading axes."""
    a, b, c, d = (np.asarray(v, dtype=float) for v in (a, b, c, d))
    ad, bd, cd = a - d, b - d, c - d
    alift = (ad**2).sum(axis=-1)
    blift = (bd**2).sum(axis=-1)
    clift = (cd**2).sum(axis=-1)
    return (
        alift * (bd[..., 0] * cd[..., 1] - bd[..., 1] * cd[..., 0])
        + blift * (cd[..., 0] * ad[..., 1] - cd[..., 1] * ad[..., 0])
        + clift * (ad[..., 0] * bd[..., 1] - ad[..., 1] * bd[..., 0])
    )


def general_position_report(
    sites: SiteSet, tol: float = GENERAL_POSITION_TOL
) -> GeneralPositionReport:
    """Find coincident pairs, collinear triples and cocircular quadruples.

    A triple is collinear if its triangle area is at most ``tol * scale**2``;
    a quadruple is cocircular if its incircle determinant is at most
    ``tol * scale**4`` in magnitude. ``scale`` is the site bounding-box diagonal.
    """
    pts = sites.coords
    k = len(pts)
    scale = sites.scale
    if scale == 0.0:
        return GeneralPositionReport(duplicates=((0, 1),) if k > 1 else ())

    pairs = np.array(list(itertools.combinations(range(k), 2)), dtype=int).reshape(-1, 2)
    dist = np.hypot(*(pts[pairs[:, 0]] - pts[pairs[:, 1]]).T)
    duplicates = tuple(tuple(map(int, p)) for p in pairs[dist <= tol * scale])

    collinear: tuple = ()
    if k >= 3:
        triples = np.array(list(itertools.combinations(range(k), 3)), dtype=int)
        area = 0.5 * np.abs(orient2d(pts[triples[:, 0]], pts[triples[:, 1]], pts[triples[:, 2]]))
        collinear = tuple(tuple(map(int, t)) for t in triples[area <= tol * scale**2])

    cocircular: tuple = ()
    if k >= 4:
        quads = np.array(list(itertools.combinations(range(k), 4)), dtype=int)
        det = incircle(*(pts[quads[:, m]] for m in range(4)))
        cocircular = tuple(tuple(map(int, q)) for q in quads[np.abs(det) <= tol * scale**4])

    return GeneralPositionReport(duplicates, collinear, cocircular)


def validate_general_position(
    sites: SiteSet, tol: float = GENERAL_POSITION_TOL
) -> GeneralPositionReport:
    """Return the (clean) report, or raise :class:`DegenerateSites` carrying it."""
    if len(sites) < 3:
        raise ValueError(f"need at least 3 sites, got {len(sites)}")
    report = general_position_report(sites, tol)
    if not report.ok:
        raise DegenerateSites(f"sites not in general position: {report.describe()}", report)
    return report


# ---------------------------------------------------------------------------
# Halfplanes and cells
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HalfPlane:
    """The closed halfplane ``{y | <normal, y> >= offset}`` with a unit normal."""

    normal: tuple[float, float]
    offset: float

    def __post_init__(self):
        n = math.hypot(*self.normal)
        if abs(n - 1.0) > 1e-12:
            raise ValueError(f"halfplane normal must be unit length, |a| = {n!r}")

    def value(self, y: ArrayLike) -> float:
        """Signed slack ``<a, y> - b`` (non-negative inside)."""
        y = as_xy(y)
        return self.normal[0] * y[0] + self.normal[1] * y[1] - self.offset


@dataclass(frozen=True)
class CellPolyhedron:
    """A (possibly unbounded) convex cell given as an intersection of halfplanes.

    ``label`` is the 0-based index tuple of the cell: ``(i,)`` for a classic
    cell, ``(i, j)`` for an order-two refined cell, and so on.
    """

    halfplanes: tuple[HalfPlane, ...]
    label: tuple[int, ...]

    @cached_property
    def normals(self) -> NDArray[np.float64]:
        arr = np.array([h.normal for h in self.halfplanes], dtype=float).reshape(-1, 2)
        arr.setflags(write=False)
        return arr

    @cached_property
    def offsets(self) -> NDArray[np.float64]:
        arr = np.array([h.offset for h in self.halfplanes], dtype=float)
        arr.setflags(write=False)
        return arr

    def __len__(self):
        return len(self.halfplanes)

    def contains(self, y: ArrayLike, slack: float = 0.0) -> bool:
        return cell_contains(self, y, slack)


def cell_contains(cell: CellPolyhedron, y: ArrayLike, slack: float = 0.0) -> bool:
    """True iff ``<a, y> >= b - slack`` for every halfplane of ``cell``."""
    if not cell.halfplanes:
        return True
    y = as_xy(y)
    return bool(np.all(cell.normals @ y >= cell.offsets - slack))


def cell_contains_many(cell: CellPolyhedron, ys: ArrayLike, slack: float = 0.0) -> NDArray[np.bool_]:
    """Vectorised :func:`cell_contains` over an ``(n, 2)`` array of points."""
    ys = np.asarray(ys, dtype=float).reshape(-1, 2)
    if not cell.halfplanes:
        return np.ones(len(ys), dtype=bool)
    return np.all(ys @ cell.normals.T >= cell.offsets - slack, axis=1)


def bisector_halfplane(i: int, j: int, sites: SiteSet | ArrayLike) -> HalfPlane:
    """Halfplane of points at least as close to site ``i`` as to site ``j``.

    ``a = (p_i - p_j) / |p_i - p_j|`` and ``b = <a, p_i + p_j> / 2``.
    """
    if i == j:
        raise ValueError("bisector needs two distinct sites")
    pts = sites.coords if isinstance(sites, SiteSet) else np.asarray(sites, dtype=float)
    pi, pj = pts[i], pts[j]
    diff = pi - pj
    norm = math.hypot(diff[0], diff[1])
    if norm == 0.0:
        raise DegenerateSites(f"sites {i + 1} and {j + 1} coincide")
    a = (float(diff[0] / norm), float(diff[1] / norm))
    b = float((a[0] * (pi[0] + pj[0]) + a[1] * (pi[1] + pj[1])) / 2.0)
    return HalfPlane(a, b)


# ---------------------------------------------------------------------------
# Delaunay triangulation
# ---------------------------------------------------------------------------


def circumcenter(p_a: ArrayLike, p_b: ArrayLike, p_c: ArrayLike) -> Point:
    """Circumcenter of a non-degenerate triangle."""
    a, b, c = as_xy(p_a), as_xy(p_b), as_xy(p_c)
    ba, ca = b - a, c - a
    d = 2.0 * (ba[0] * ca[1] - ba[1] * ca[0])
    scale = bbox_diagonal(np.stack([a, b, c]))
    if scale == 0.0 or abs(d) / 4.0 <= GENERAL_POSITION_TOL * scale**2:
        raise DegenerateSites("circumcenter of collinear points is undefined")
    bl, cl = ba @ ba, ca @ ca
    ux = (ca[1] * bl - ba[1] * cl) / d
    uy = (ba[0] * cl - ca[0] * bl) / d
    return Point(float(a[0] + ux), float(a[1] + uy))


def _edge(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class DelaunayTriangulation:
    """Triangles (counterclockwise index triples) and derived edge structures."""

    triangles: tuple[tuple[int, int, int], ...]
    interior_edges: tuple[tuple[int, int], ...]
    boundary_edges: tuple[tuple[int, int], ...]
    neighbors: tuple[frozenset[int], ...]
    #: edge -> indices of incident triangles (one for boundary, two for interior)
    edge_triangles: dict = field(repr=False, compare=False)

    @property
    def edges(self) -> tuple[tuple[int, int], ...]:
        return tuple(sorted(self.interior_edges + self.boundary_edges))


def _lower_hull_triangles(pts: NDArray[np.float64]) -> list[tuple[int, int, int]]:
    lifted = np.column_stack([pts, (pts**2).sum(axis=1)])
    hull = ConvexHull(lifted)
    # qhull's facet equations carry outward normals; downward ones are Delaunay.
    lower = hull.equations[:, 2] < 0
    return [tuple(int(v) for v in s) for s in hull.simplices[lower]]


def delaunay_triangulate(sites: SiteSet, validate: bool = True) -> DelaunayTriangulation:
    """Delaunay triangulation via the lower convex hull of the lifted sites.

    Each site ``(p1, p2)`` is lifted to ``(p1, p2, p1**2 + p2**2)``; hull facets
    with downward outward normal project back to the Delaunay triangles.
    """
    if validate:
        validate_general_position(sites)
    pts = sites.coords
    k = len(pts)
    if k == 3:
        raw = [(0, 1, 2)]
    else:
        raw = _lower_hull_triangles(pts)

    triangles = []
    for t in raw:
        a, b, c = t
        if orient2d(pts[a], pts[b], pts[c]) < 0:
            b, c = c, b
        # canonical rotation: smallest index first
        rot = min(range(3), key=lambda r: (a, b, c)[r])
        tri = (a, b, c)[rot:] + (a, b, c)[:rot]
        triangles.append(tri)
    triangles.sort()

    edge_triangles: dict[tuple[int, int], list[int]] = {}
    for ti, (a, b, c) in enumerate(triangles):
        for e in (_edge(a, b), _edge(b, c), _edge(c, a)):
            edge_triangles.setdefault(e, []).append(ti)
    interior = tuple(sorted(e for e, ts in edge_triangles.items() if len(ts) == 2))
    boundary = tuple(sorted(e for e, ts in edge_triangles.items() if len(ts) == 1))
    if any(len(ts) > 2 for ts in edge_triangles.values()):
        raise DegenerateSites("inconsistent triangulation: edge shared by >2 triangles")

    neigh: list[set[int]] = [set() for _ in range(k)]
    for i, j in edge_triangles:
        neigh[i].add(j)
        neigh[j].add(i)
    return DelaunayTriangulation(
        triangles=tuple(triangles),
        interior_edges=interior,
        boundary_edges=boundary,
        neighbors=tuple(frozenset(n) for n in neigh),
        edge_triangles={e: tuple(ts) for e, ts in edge_triangles.items()},
    )


# ---------------------------------------------------------------------------
# Voronoi diagram
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VoronoiRay:
    """Infinite Voronoi edge dual to a Delaunay boundary edge."""

    origin: int  # index into VoronoiDiagram.vertices
    direction: tuple[float, float]
    sites: tuple[int, int]


@dataclass(frozen=True)
class VoronoiDiagram:
    """Classic Voronoi diagram: one halfplane cell per site plus its graph.

    ``vertices[t]`` is the circumcenter of Delaunay triangle ``t``; finite
    edges join circumcenters of triangles sharing an interior Delaunay edge.
    """

    sites: SiteSet
    triangulation: DelaunayTriangulation
    cells: tuple[CellPolyhedron, ...]
    vertices: NDArray[np.float64] = field(repr=False)
    edges: tuple[tuple[int, int], ...]
    edge_sites: tuple[tuple[int, int], ...]
    rays: tuple[VoronoiRay, ...]

    def __len__(self):
        return len(self.cells)

    def cell(self, i: int) -> CellPolyhedron:
        return self.cells[i]


def voronoi_cells_for(
    pts: NDArray[np.float64], ids: Sequence[int]
) -> dict[int, CellPolyhedron]:
    """Classic cells of the sub-configuration ``pts`` whose rows carry site ids ``ids``.

    Handles the small cases directly: one site owns the plane, two sites split
    along their bisector. Three or more sites go through the triangulation.
    Halfplanes are expressed with the global site ids so they can be merged
    with cells of other sub-configurations.
    """
    ids = list(ids)
    n = len(ids)
    if n == 0:
        return {}
    if n == 1:
        return {ids[0]: CellPolyhedron((), (ids[0],))}
    if n == 2:
        h01 = bisector_halfplane(0, 1, pts)
        h10 = bisector_halfplane(1, 0, pts)
        return {
            ids[0]: CellPolyhedron((h01,), (ids[0],)),
            ids[1]: CellPolyhedron((h10,), (ids[1],)),
        }
    tri = delaunay_triangulate(SiteSet(pts))
    return {
        ids[m]: CellPolyhedron(
            tuple(bisector_halfplane(m, nb, pts) for nb in sorted(tri.neighbors[m])),
            (ids[m],),
        )
        for m in range(n)
    }


def voronoi_from_delaunay(sites: SiteSet, tri: DelaunayTriangulation) -> VoronoiDiagram:
    """Cells ``V_i = ∩_{j in N_i} H+_ij`` and the circumcenter graph."""
    pts = sites.coords
    cells = tuple(
        CellPolyhedron(
            tuple(bisector_halfplane(i, j, pts) for j in sorted(tri.neighbors[i])),
            (i,),
        )
        for i in range(len(sites))
    )
    vertices = np.array(
        [tuple(circumcenter(pts[a], pts[b], pts[c])) for a, b, c in tri.triangles],
        dtype=float,
    ).reshape(-1, 2)
    vertices.setflags(write=False)

    edges, edge_sites = [], []
    for e in tri.interior_edges:
        ta, tb = tri.edge_triangles[e]
        edges.append((ta, tb))
        edge_sites.append(e)

    rays = []
    for i, j in tri.boundary_edges:
        (t,) = tri.edge_triangles[(i, j)]
        third = next(v for v in tri.triangles[t] if v not in (i, j))
        d = pts[j] - pts[i]
        n = np.array([-d[1], d[0]]) / math.hypot(d[0], d[1])
        if n @ (pts[third] - pts[i]) > 0:
            n = -n
        rays.append(VoronoiRay(t, (float(n[0]), float(n[1])), (i, j)))

    return VoronoiDiagram(
        sites=sites,
        triangulation=tri,
        cells=cells,
        vertices=vertices,
        edges=tuple(edges),
        edge_sites=tuple(edge_sites),
        rays=tuple(rays),
    )


def voronoi_diagram(sites: SiteSet | ArrayLike) -> VoronoiDiagram:
    """Validate, triangulate and build the classic diagram in one call."""
    if not isinstance(sites, SiteSet):
        sites = SiteSet(sites)
    return voronoi_from_delaunay(sites, delaunay_triangulate(sites))


def nearest_site(sites: SiteSet | ArrayLike, y: ArrayLike) -> int:
    """Index of the nearest site, lowest index on ties."""
    pts = sites.coords if isinstance(sites, SiteSet) else np.asarray(sites, dtype=float)
    d = np.hypot(*(pts - as_xy(y)).T)
    return int(np.argmin(d))


# ---------------------------------------------------------------------------
# Polygons (rendering and area only)
# ---------------------------------------------------------------------------


def polygon_area(vertices: ArrayLike) -> float:
    """Signed shoelace area (positive for counterclockwise order)."""
    v = np.asarray(vertices, dtype=float).reshape(-1, 2)
    if len(v) < 3:
        return 0.0
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def ccw_polygon(vertices: ArrayLike) -> NDArray[np.float64]:
    v = np.asarray(vertices, dtype=float).reshape(-1, 2)
    return v[::-1].copy() if polygon_area(v) < 0 else v.copy()


def is_convex_polygon(vertices: ArrayLike, tol: float = 1e-12) -> bool:
    v = ccw_polygon(vertices)
    if len(v) < 3:
        return False
    turns = orient2d(v, np.roll(v, -1, axis=0), np.roll(v, -2, axis=0))
    scale = bbox_diagonal(v)
    return bool(np.all(turns >= -tol * scale**2)) and polygon_area(v) > tol * scale**2


def polygon_halfplanes(vertices: ArrayLike) -> tuple[HalfPlane, ...]:
    """Inward halfplanes of a convex polygon's edges."""
    v = ccw_polygon(vertices)
    out = []
    for p, q in zip(v, np.roll(v, -1, axis=0)):
        d = q - p
        length = math.hypot(d[0], d[1])
        if length == 0.0:
            continue
        n = (float(-d[1] / length), float(d[0] / length))
        out.append(HalfPlane(n, float(n[0] * p[0] + n[1] * p[1])))
    return tuple(out)


def clip_polygon(
    vertices: ArrayLike, halfplanes: Iterable[HalfPlane]
) -> NDArray[np.float64]:
    """Sutherland-Hodgman clipping of a convex polygon by closed halfplanes."""
    poly = [np.asarray(p, dtype=float) for p in ccw_polygon(vertices)]
    for h in halfplanes:
        if not poly:
            break
        a = np.asarray(h.normal)
        out = []
        n = len(poly)
        for m in range(n):
            p, q = poly[m], poly[(m + 1) % n]
            fp, fq = a @ p - h.offset, a @ q - h.offset
            if fp >= 0:
                out.append(p)
            if (fp >= 0) != (fq >= 0):
                t = fp / (fp - fq)
                out.append(p + t * (q - p))
        poly = out
    if not poly:
        return np.empty((0, 2))
    return np.array(poly)


def clip_to_surface(
    cell: CellPolyhedron, surface: ArrayLike, tol: float = 1e-12
) -> NDArray[np.float64]:
    """Vertices of ``cell ∩ surface`` in counterclockwise order.

    Returns an empty ``(0, 2)`` array when the intersection has no area.
    """
    surface = np.asarray(surface, dtype=float).reshape(-1, 2)
    if len(surface) < 3:
        raise ValueError("surface polygon needs at least 3 vertices")
    poly = clip_polygon(surface, cell.halfplanes)
    scale = bbox_diagonal(surface)
    if len(poly) == 0:
        return np.empty((0, 2))
    # drop consecutive duplicates produced by clipping through vertices
    keep = [poly[0]]
    for p in poly[1:]:
        if np.hypot(*(p - keep[-1])) > tol * scale:
            keep.append(p)
    if len(keep) > 1 and np.hypot(*(keep[0] - keep[-1])) <= tol * scale:
        keep.pop()
    poly = np.array(keep)
    if len(poly) < 3 or polygon_area(poly) <= tol * scale**2:
        return np.empty((0, 2))
    return poly
