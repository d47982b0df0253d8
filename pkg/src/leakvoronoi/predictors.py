"""
Flow-vector predictors.

The classic predictor maps flows ``x`` to the cell of the connection with the
largest flow; the refined predictor maps them to the order-two refined cell of
the two largest flows, in descending order. A refined prediction whose cell
is flagged empty is invalid and carries only its index tuple.

Ties between equal flows always go to the lower connection index.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np
from numpy.typing import ArrayLike

from .errors import EmptyCell, MissingLink
from .geometry import CellPolyhedron, VoronoiDiagram, as_xy, cell_contains
from .models import Sample
from .projection import distance_to_cell
from .refined import RefinedDiagram, locate_ordered

CONTAINS_SLACK = 1e-9


def format_label(label: tuple[int, ...] | None) -> str:
    """1-based cell name as used in the figures: ``V_3``, ``V_(2,10)``; ``None`` for invalid."""
    if label is None:
        return "None"
    if len(label) == 1:
        return f"V_{label[0] + 1}"
    return "V_(" + ",".join(str(i + 1) for i in label) + ")"


def format_tuple(label: tuple[int, ...]) -> str:
    return "(" + ",".join(str(i + 1) for i in label) + ")"


def _flows(x: ArrayLike, k: int) -> np.ndarray:
    x = np.asarray(x, dtype=float).ravel()
    if len(x) != k:
        raise ValueError(f"flow vector has {len(x)} entries, expected {k}")
    if not np.all(np.isfinite(x)):
        raise ValueError("flow vector contains non-finite entries")
    return x


def argmax_index(x: ArrayLike) -> int:
    x = np.asarray(x, dtype=float).ravel()
    if len(x) == 0:
        raise ValueError("empty flow vector")
    # np.argmax returns the first maximum
    return int(np.argmax(x))


def top2_ordered(x: ArrayLike) -> tuple[int, int]:
    x = np.asarray(x, dtype=float).ravel()
    if len(x) < 2:
        raise ValueError("need at least two flows")
    order = np.argsort(-x, kind="stable")
    return int(order[0]), int(order[1])


@dataclass(frozen=True)
class Prediction:
    """Predicted cell; ``cell`` is ``None`` for an invalid refined prediction."""

    label: tuple[int, ...]
    cell: CellPolyhedron | None

    @property
    def valid(self) -> bool:
        return self.cell is not None

    def contains(self, y: ArrayLike, slack: float = CONTAINS_SLACK) -> bool:
        return self.valid and cell_contains(self.cell, y, slack)

    def distance(self, y: ArrayLike) -> float:
        if self.cell is None:
            raise EmptyCell(f"invalid prediction {format_tuple(self.label)} has no cell")
        return distance_to_cell(y, self.cell)

    def __str__(self):
        if self.valid:
            return format_label(self.label)
        return f"INVALID {format_tuple(self.label)}"


def classic_predict(x: ArrayLike, vd: VoronoiDiagram) -> Prediction:
    i = argmax_index(_flows(x, len(vd.cells)))
    return Prediction((i,), vd.cells[i])


def refined_predict(x: ArrayLike, rvd: RefinedDiagram) -> Prediction:
    if rvd.order != 2:
        raise ValueError("the refined predictor needs an order-2 diagram")
    t = top2_ordered(_flows(x, len(rvd.sites)))
    if rvd.is_empty(t):
        return Prediction(t, None)
    return Prediction(t, rvd.cell(t))


def simultaneous_predict(x: ArrayLike, vd: VoronoiDiagram) -> tuple[CellPolyhedron, CellPolyhedron]:
    i, j = top2_ordered(_flows(x, len(vd.cells)))
    return vd.cells[i], vd.cells[j]


class ClassicPredictor:
    name = "classic"

    def __init__(self, diagram: VoronoiDiagram):
        self.diagram = diagram
        self.sites = diagram.sites

    @property
    def k(self) -> int:
        return len(self.sites)

    def predict(self, x: ArrayLike) -> Prediction:
        return classic_predict(x, self.diagram)

    def truth_label(self, y: ArrayLike) -> tuple[int, ...]:
        return locate_ordered(self.sites, y, 1)

    def labels(self) -> list[tuple[int, ...]]:
        return [c.label for c in self.diagram.cells]


class RefinedPredictor:
    name = "refined"

    def __init__(self, diagram: RefinedDiagram):
        if diagram.order != 2:
            raise ValueError("the refined predictor needs an order-2 diagram")
        self.diagram = diagram
        self.sites = diagram.sites

    @property
    def k(self) -> int:
        return len(self.sites)

    def predict(self, x: ArrayLike) -> Prediction:
        return refined_predict(x, self.diagram)

    def truth_label(self, y: ArrayLike) -> tuple[int, ...]:
        return locate_ordered(self.sites, y, 2)

    def labels(self) -> list[tuple[int, ...]]:
        return self.diagram.nonempty_labels()


@dataclass(frozen=True)
class StepRecord:
    """Outcome of the two-round repeated strategy on one two-leak sample.

    ``fixed`` is the index (0 or 1) of the leak considered found in round
    one; ``both_inside`` marks the ambiguous case where the round-one cell
    held both leaks and the leak nearer the cell's connection was chosen.
    Distances are ``None`` for invalid predictions, and all round-two fields
    are ``None`` when round one failed.
    """

    sample_id: int
    step1: Prediction
    step1_correct: bool
    step1_distance: float | None
    fixed: int | None = None
    both_inside: bool = False
    step2: Prediction | None = None
    step2_correct: bool | None = None
    step2_distance: float | None = None


def repeated_strategy_step(
    sample: Sample, predictor, singles: Mapping[int, Sample]
) -> StepRecord:
    if sample.links is None or any(lid not in singles for lid in sample.links):
        raise MissingLink(f"two-leak sample {sample.id} lacks its single-leak samples")

    p1 = predictor.predict(sample.flows)
    if not p1.valid:
        return StepRecord(sample.id, p1, False, None)

    inside = [p1.contains(leak) for leak in sample.leaks]
    d1 = min(p1.distance(leak) for leak in sample.leaks)
    if not any(inside):
        return StepRecord(sample.id, p1, False, d1)

    both = all(inside)
    if both:
        site = predictor.sites.coords[p1.label[0]]
        gaps = [float(np.hypot(*(as_xy(leak) - site))) for leak in sample.leaks]
        fixed = 0 if gaps[0] <= gaps[1] else 1
    else:
        fixed = inside.index(True)

    remaining = 1 - fixed
    follow_up = singles[sample.links[remaining]]
    leak = sample.leaks[remaining]
    p2 = predictor.predict(follow_up.flows)
    ok2 = p2.contains(leak)
    d2 = p2.distance(leak) if p2.valid else None
    return StepRecord(sample.id, p1, True, d1, fixed, both, p2, ok2, d2)
