"""
Evaluation of Voronoi predictors on single- and two-leak datasets.

Distances are kept in meters; the ``*_cm`` properties convert for reports.
Invalid refined predictions count as incorrect for accuracy and are left out
of every distance mean.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import EmptyInput
from .geometry import VoronoiDiagram, as_xy, cell_contains
from .models import Dataset, Sample
from .predictors import (
    CONTAINS_SLACK,
    ClassicPredictor,
    Prediction,
    StepRecord,
    argmax_index,
    repeated_strategy_step,
    top2_ordered,
)
from .projection import distance_to_cell

OUTLIER_THRESHOLD = 2.0
#: Leaks closer than this to a cell boundary (in distance margin) get flagged.
BOUNDARY_MARGIN = 1e-7


def accuracy(results: Sequence[bool]) -> float:
    if len(results) == 0:
        raise EmptyInput("accuracy over zero samples")
    return sum(bool(r) for r in results) / len(results)


def mean_euclidean_distance(distances: Sequence[float | None], mode: str = "full") -> float:
    """Mean leak-to-cell distance in meters.

    ``None`` entries (invalid predictions) are skipped. ``mode="full"``
    averages over all remaining samples, ``mode="incorrect_only"`` over those
    with a nonzero distance; with no incorrect sample the latter is 0.
    """
    d = [x for x in distances if x is not None]
    if not d:
        raise EmptyInput("mean distance over zero valid predictions")
    total = float(sum(d))
    if mode == "full":
        return total / len(d)
    if mode == "incorrect_only":
        n_wrong = sum(1 for x in d if x > 0)
        return total / n_wrong if n_wrong else 0.0
    raise ValueError(f"unknown mode {mode!r}")


@dataclass(frozen=True)
class MetricsReport:
    n_samples: int
    n_correct: int
    n_incorrect: int  # valid but wrong
    n_invalid: int
    accuracy: float
    mean_dist_full: float
    mean_dist_incorrect: float

    @property
    def no_incorrect(self) -> bool:
        return self.n_incorrect == 0

    @property
    def mean_dist_full_cm(self) -> float:
        return 100.0 * self.mean_dist_full

    @property
    def mean_dist_incorrect_cm(self) -> float:
        return 100.0 * self.mean_dist_incorrect

    @classmethod
    def from_outcomes(cls, correct: Sequence[bool], distances: Sequence[float | None]) -> MetricsReport:
        n = len(correct)
        if n == 0:
            raise EmptyInput("no samples to evaluate")
        n_invalid = sum(d is None for d in distances)
        n_correct = sum(bool(c) for c in correct)
        valid = [d for d in distances if d is not None]
        return cls(
            n_samples=n,
            n_correct=n_correct,
            n_incorrect=n - n_correct - n_invalid,
            n_invalid=n_invalid,
            accuracy=accuracy(correct),
            mean_dist_full=mean_euclidean_distance(valid, "full") if valid else 0.0,
            mean_dist_incorrect=mean_euclidean_distance(valid, "incorrect_only") if valid else 0.0,
        )


# ---------------------------------------------------------------------------
# Cleaning
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OutlierReport:
    threshold: float
    #: (sample id, distance in meters) of removed single-leak samples
    single: tuple[tuple[int, float], ...]
    #: (sample id, smaller of the two leak distances) of two-leak outliers
    two_leak: tuple[tuple[int, float], ...]
    #: two-leak samples dropped because they link to a removed single-leak sample
    cascade: tuple[int, ...]

    @property
    def removed_ids(self) -> list[int]:
        return sorted([i for i, _ in self.single] + [i for i, _ in self.two_leak] + list(self.cascade))


def classic_outlier_distance(sample: Sample, vd: VoronoiDiagram) -> list[float]:
    """Distance of each leak to the classic cell of the largest flow."""
    cell = vd.cells[argmax_index(sample.flows)]
    return [distance_to_cell(leak, cell) for leak in sample.leaks]


def clean_outliers(
    dataset: Dataset, vd: VoronoiDiagram, threshold: float = OUTLIER_THRESHOLD
) -> tuple[Dataset, OutlierReport]:
    """Drop samples whose leaks lie more than ``threshold`` meters from the predicted classic cell.

    Two-leak samples go only if both leaks are that far, and also whenever
    they link to a removed single-leak sample.
    """
    keep_single, out_single = [], []
    for s in dataset.single:
        (d,) = classic_outlier_distance(s, vd)
        if d > threshold:
            out_single.append((s.id, d))
        else:
            keep_single.append(s)
    removed = {i for i, _ in out_single}

    keep_two, out_two, cascade = [], [], []
    for s in dataset.two_leak:
        ds = classic_outlier_distance(s, vd)
        if all(d > threshold for d in ds):
            out_two.append((s.id, min(ds)))
        elif s.links is not None and any(lid in removed for lid in s.links):
            cascade.append(s.id)
        else:
            keep_two.append(s)

    cleaned = dataset.with_samples(keep_single, keep_two, provenance="cleaned")
    return cleaned, OutlierReport(threshold, tuple(out_single), tuple(out_two), tuple(cascade))


# ---------------------------------------------------------------------------
# Confusion matrices
# ---------------------------------------------------------------------------

NONE_LABEL = None


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts with truth labels as rows and predicted labels (plus ``None``) as columns."""

    labels: tuple[tuple[int, ...], ...]
    counts: np.ndarray = field(repr=False)
    normalization: str | None = None

    @property
    def columns(self) -> tuple:
        return self.labels + (NONE_LABEL,)

    @property
    def values(self) -> np.ndarray:
        c = self.counts.astype(float)
        if self.normalization is None:
            return c
        axis = {"column": 0, "row": 1}[self.normalization]
        sums = c.sum(axis=axis, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(sums > 0, c / np.where(sums > 0, sums, 1.0), 0.0)

    def normalized(self, normalization: str | None) -> ConfusionMatrix:
        return ConfusionMatrix(self.labels, self.counts, normalization)

    def diagonal(self) -> np.ndarray:
        v = self.values
        n = len(self.labels)
        return v[np.arange(n), np.arange(n)]

    def mean_diagonal(self) -> float:
        return float(self.diagonal().mean()) if self.labels else 0.0

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def confusion_matrix(
    truths: Sequence[tuple[int, ...]],
    predictions: Sequence[Prediction],
    normalization: str | None = None,
    labels: Sequence[tuple[int, ...]] | None = None,
) -> ConfusionMatrix:
    if len(truths) != len(predictions):
        raise ValueError("truths and predictions differ in length")
    observed = set(truths) | {p.label for p in predictions if p.valid}
    labels = sorted(set(labels or ()) | observed)
    index = {lab: n for n, lab in enumerate(labels)}
    counts = np.zeros((len(labels), len(labels) + 1), dtype=int)
    for t, p in zip(truths, predictions):
        col = index[p.label] if p.valid else len(labels)
        counts[index[t], col] += 1
    return ConfusionMatrix(tuple(labels), counts, normalization)


# ---------------------------------------------------------------------------
# Pipelines
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SampleRecord:
    sample_id: int
    leak: tuple[float, float]
    truth: tuple[int, ...]
    prediction: Prediction
    correct: bool
    distance: float | None
    on_boundary: bool = False


@dataclass(frozen=True)
class SingleLeakResult:
    predictor: str
    provenance: str
    metrics: MetricsReport
    confusion: ConfusionMatrix
    records: tuple[SampleRecord, ...]

    @property
    def confusion_column(self) -> ConfusionMatrix:
        return self.confusion.normalized("column")

    @property
    def confusion_row(self) -> ConfusionMatrix:
        return self.confusion.normalized("row")

    @property
    def invalid_labels(self) -> list[tuple[int, ...]]:
        return [r.prediction.label for r in self.records if not r.prediction.valid]


def _near_boundary(sites: np.ndarray, y: np.ndarray, d: int) -> bool:
    dist = np.sort(np.hypot(*(sites - y).T))
    return bool(np.any(np.diff(dist[: d + 1]) <= BOUNDARY_MARGIN))


def evaluate_single_leak(dataset: Dataset, predictor) -> SingleLeakResult:
    records = []
    d = 1 if isinstance(predictor, ClassicPredictor) else 2
    sites = predictor.sites.coords
    for s in dataset.single:
        leak = as_xy(s.leaks[0])
        p = predictor.predict(s.flows)
        ok = p.contains(leak)
        dist = p.distance(leak) if p.valid else None
        records.append(
            SampleRecord(
                s.id,
                (float(leak[0]), float(leak[1])),
                predictor.truth_label(leak),
                p,
                ok,
                dist,
                _near_boundary(sites, leak, d),
            )
        )
    if not records:
        raise EmptyInput("dataset has no single-leak samples")
    metrics = MetricsReport.from_outcomes([r.correct for r in records], [r.distance for r in records])
    cm = confusion_matrix(
        [r.truth for r in records], [r.prediction for r in records], labels=predictor.labels()
    )
    return SingleLeakResult(predictor.name, dataset.provenance, metrics, cm, tuple(records))


@dataclass(frozen=True)
class MultiLeakResult:
    predictor: str
    provenance: str
    step1: MetricsReport
    step2: MetricsReport | None
    records: tuple[StepRecord, ...]

    @property
    def ambiguous_fixes(self) -> int:
        """Round-one successes where both leaks were inside the predicted cell."""
        return sum(r.both_inside for r in self.records)


def evaluate_multi_leak(dataset: Dataset, predictor) -> MultiLeakResult:
    dataset.check_links()
    singles = dataset.singles
    records = tuple(repeated_strategy_step(s, predictor, singles) for s in dataset.two_leak)
    if not records:
        raise EmptyInput("dataset has no two-leak samples")
    step1 = MetricsReport.from_outcomes(
        [r.step1_correct for r in records], [r.step1_distance for r in records]
    )
    followed = [r for r in records if r.step1_correct]
    step2 = (
        MetricsReport.from_outcomes(
            [r.step2_correct for r in followed], [r.step2_distance for r in followed]
        )
        if followed
        else None
    )
    return MultiLeakResult(predictor.name, dataset.provenance, step1, step2, records)


@dataclass(frozen=True)
class SimultaneousResult:
    n_samples: int
    both: int
    one: int
    neither: int


def evaluate_simultaneous(dataset: Dataset, vd: VoronoiDiagram) -> SimultaneousResult:
    """Two classic cells of the two largest flows, scored against both leaks."""
    both = one = neither = 0
    for s in dataset.two_leak:
        i, j = top2_ordered(s.flows)
        ci, cj = vd.cells[i], vd.cells[j]
        a, b = s.leaks
        hit = [[cell_contains(c, leak, CONTAINS_SLACK) for leak in (a, b)] for c in (ci, cj)]
        if (hit[0][0] and hit[1][1]) or (hit[0][1] and hit[1][0]):
            both += 1
        elif any(hit[0]) or any(hit[1]):
            one += 1
        else:
            neither += 1
    return SimultaneousResult(len(dataset.two_leak), both, one, neither)


@dataclass(frozen=True)
class InvalidAnalysis:
    histogram: dict[tuple[int, int], int]
    #: keys: "both", "first_only", "second_only", "neither"
    breakdown: dict[str, int]
    possible: tuple[tuple[int, ...], ...]
    absent: tuple[tuple[int, ...], ...]
    n_nonempty: int

    @property
    def total(self) -> int:
        return sum(self.histogram.values())


def invalid_prediction_analysis(
    dataset: Dataset, predictor, vd: VoronoiDiagram
) -> InvalidAnalysis:
    """Histogram of invalid refined predictions on the two-leak samples.

    Each invalid tuple ``(i1, i2)`` is classified by which of the classic
    cells ``V_i1``, ``V_i2`` hold at least one of the sample's leaks.
    """
    hist: Counter = Counter()
    breakdown = {"both": 0, "first_only": 0, "second_only": 0, "neither": 0}
    for s in dataset.two_leak:
        p = predictor.predict(s.flows)
        if p.valid:
            continue
        hist[p.label] += 1
        i1, i2 = p.label
        in1 = any(cell_contains(vd.cells[i1], leak, CONTAINS_SLACK) for leak in s.leaks)
        in2 = any(cell_contains(vd.cells[i2], leak, CONTAINS_SLACK) for leak in s.leaks)
        key = "both" if in1 and in2 else "first_only" if in1 else "second_only" if in2 else "neither"
        breakdown[key] += 1
    possible = tuple(predictor.diagram.empty_labels())
    absent = tuple(t for t in possible if t not in hist)
    return InvalidAnalysis(
        dict(sorted(hist.items())),
        breakdown,
        possible,
        absent,
        len(predictor.diagram.nonempty_labels()),
    )
