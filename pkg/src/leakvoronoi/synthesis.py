"""
Synthetic leak datasets.

The flow model is a stand-in, not physics: every leak contributes
``(1 + distance)**(-alpha)`` to each connection, contributions add up, and
each connection's total is scaled by ``1 + eps`` with seeded Gaussian
``eps`` of standard deviation ``sigma`` clipped inside (-1, 1). Flows strictly
decrease with the leak-connection distance when ``sigma == 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from .geometry import Point, as_xy, bbox_diagonal, polygon_halfplanes
from .models import Dataset, Sample, SetupConfig

GRID_PITCH = 0.25
_EPS_CLIP = 1.0 - 1e-9


@dataclass(frozen=True)
class FlowModel:
    alpha: float = 2.0
    sigma: float = 0.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("decay exponent must be positive")
        if not self.sigma >= 0:
            raise ValueError("noise level must be non-negative")


def generate_leak_grid(surface: ArrayLike, pitch: float = GRID_PITCH) -> list[Point]:
    """Nodes of a ``pitch``-spaced grid anchored at the surface's lower-left
    bounding-box corner, keeping only nodes strictly inside the surface."""
    if not pitch > 0:
        raise ValueError("grid pitch must be positive")
    poly = np.asarray(surface, dtype=float).reshape(-1, 2)
    lo, hi = poly.min(axis=0), poly.max(axis=0)
    tol = 1e-9 * bbox_diagonal(poly)
    halfplanes = polygon_halfplanes(poly)
    nx = int(math.floor((hi[0] - lo[0]) / pitch)) + 1
    ny = int(math.floor((hi[1] - lo[1]) / pitch)) + 1
    nodes = []
    for j in range(ny):
        for i in range(nx):
            y = np.array([lo[0] + i * pitch, lo[1] + j * pitch])
            if all(h.value(y) > tol for h in halfplanes):
                nodes.append(Point(float(y[0]), float(y[1])))
    return nodes


def synth_flows(
    leaks: ArrayLike,
    connections: ArrayLike,
    model: FlowModel = FlowModel(),
    seed: int | np.random.Generator | None = 0,
) -> np.ndarray:
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    pts = np.asarray(connections.coords if hasattr(connections, "coords") else connections, dtype=float)
    leaks = np.array([as_xy(p) for p in leaks])
    dist = np.linalg.norm(pts[None, :, :] - leaks[:, None, :], axis=2)
    x = ((1.0 + dist) ** (-model.alpha)).sum(axis=0)
    if model.sigma > 0:
        eps = np.clip(rng.normal(0.0, model.sigma, size=len(pts)), -_EPS_CLIP, _EPS_CLIP)
        x = x * (1.0 + eps)
    return x


def generate_dataset(
    setup: SetupConfig,
    n_single: int,
    n_two_leak: int = 0,
    model: FlowModel = FlowModel(),
    seed: int = 0,
    pitch: float = GRID_PITCH,
) -> Dataset:
    """Random grid-node trials; two-leak trials pair single-leak trials.

    The first ``n_single - 1`` two-leak samples pair consecutive single-leak
    trials, as in an acquisition run that opens the next leak before fixing
    the previous one; any further ones pair random distinct trials.
    """
    if n_two_leak and n_single < 2:
        raise ValueError("two-leak samples need at least two single-leak samples")
    grid = generate_leak_grid(setup.surface_array, pitch)
    if not grid:
        raise ValueError("leak grid is empty for this surface and pitch")
    rng = np.random.default_rng(seed)

    positions: list[Point] = []
    for _ in range(n_single):
        while True:
            node = grid[int(rng.integers(len(grid)))]
            # consecutive trials never share a node, so paired leaks are distinct
            if not positions or node != positions[-1] or len(grid) == 1:
                break
        positions.append(node)

    single = [
        Sample(i + 1, tuple(float(v) for v in synth_flows([p], setup.connections, model, rng)), (p,))
        for i, p in enumerate(positions)
    ]

    distinct = len(set(positions)) > 1
    pairs = []
    for n in range(n_two_leak):
        if n < n_single - 1:
            a, b = n, n + 1
        else:
            while True:
                a, b = (int(v) for v in rng.choice(n_single, size=2, replace=False))
                if positions[a] != positions[b] or not distinct:
                    break
        pairs.append((a, b))

    two = []
    for n, (a, b) in enumerate(pairs):
        leaks = (positions[a], positions[b])
        x = synth_flows(leaks, setup.connections, model, rng)
        two.append(Sample(n_single + n + 1, tuple(float(v) for v in x), leaks, (a + 1, b + 1)))

    return Dataset(setup, tuple(single), tuple(two), provenance="original", synthetic=True)
