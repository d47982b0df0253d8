"""
Euclidean projection onto halfplane cells with Dykstra's algorithm.

One iteration is one full cycle over the cell's halfplanes, in the order the
cell stores them. The budget defaults to 100 cycles, with an early stop once
no sub-step of a cycle moves the iterate by more than ``tol``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike
from scipy.optimize import nnls

from .geometry import CellPolyhedron, HalfPlane, Point, as_xy, cell_contains

MAX_ITERS = 100
TOL = 1e-12


@dataclass(frozen=True)
class ProjectionResult:
    point: Point
    distance: float
    iterations_used: int
    converged: bool


def project_halfplane(y: ArrayLike, h: HalfPlane) -> np.ndarray:
    """Closed-form projection onto ``{z | <a, z> >= b}``."""
    y = as_xy(y)
    a = np.asarray(h.normal)
    gap = h.offset - a @ y
    if gap <= 0:
        return y
    return y + gap * a


def dykstra_project(
    y: ArrayLike,
    cell: CellPolyhedron,
    max_iters: int = MAX_ITERS,
    tol: float = TOL,
) -> ProjectionResult:
    """Project ``y`` onto ``cell`` (assumed nonempty).

    Non-convergence within ``max_iters`` cycles is reported through
    ``converged=False``; the last iterate is returned.
    """
    y = as_xy(y)
    A, b = cell.normals, cell.offsets
    m = len(b)
    x = y.copy()
    if m == 0:
        return ProjectionResult(Point(*map(float, x)), 0.0, 0, True)

    # Dykstra increments; for halfplanes each is a multiple of its normal.
    incr = np.zeros((m, 2))
    converged = False
    it = 0
    while it < max_iters:
        it += 1
        step = 0.0
        for i in range(m):
            z = x + incr[i]
            gap = b[i] - A[i] @ z
            x_new = z + gap * A[i] if gap > 0 else z
            incr[i] = z - x_new
            step = max(step, float(np.hypot(*(x_new - x))))
            x = x_new
        if step < tol:
            converged = True
            break
    return ProjectionResult(Point(float(x[0]), float(x[1])), float(np.hypot(*(y - x))), it, converged)


def distance_to_cell(y: ArrayLike, cell: CellPolyhedron, max_iters: int = MAX_ITERS) -> float:
    """Distance from ``y`` to ``cell``; exactly 0 for points inside (slack 1e-9)."""
    if cell_contains(cell, y, 1e-9):
        return 0.0
    return dykstra_project(y, cell, max_iters=max_iters).distance


def kkt_residual(y: ArrayLike, cell: CellPolyhedron, z: ArrayLike, active_tol: float = 1e-7) -> float:
    """Optimality residual of ``z`` as the projection of ``y``.

    ``y - z`` must be a non-negative combination of the negated normals of
    the halfplanes active at ``z``; returns the least-squares residual of the
    best such combination, or the violation of ``z``'s feasibility if larger.
    """
    y, z = as_xy(y), as_xy(z)
    A, b = cell.normals, cell.offsets
    if len(b) == 0:
        return float(np.hypot(*(y - z)))
    slack = A @ z - b
    infeas = max(0.0, float(-slack.min()))
    active = slack <= active_tol
    target = y - z
    if not active.any():
        return max(infeas, float(np.hypot(*target)))
    _, res = nnls(-A[active].T, target)
    return max(infeas, float(res))
