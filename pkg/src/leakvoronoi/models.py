"""Setup, sample and dataset records."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import FormatError, MissingLink
from .geometry import (
    Point,
    SiteSet,
    bbox_diagonal,
    ccw_polygon,
    is_convex_polygon,
    polygon_halfplanes,
)

#: Connections and leaks may sit this far (relative to the surface size) outside it.
BOUNDARY_TOL = 1e-9


@dataclass(frozen=True)
class SetupConfig:
    """Surface polygon and vacuum-connection positions, in meters."""

    name: str
    surface: tuple[Point, ...]
    connections: SiteSet

    def __post_init__(self):
        if len(self.connections) < 3:
            raise FormatError(f"need at least 3 connections, got {len(self.connections)}")
        if len(self.surface) < 3 or not is_convex_polygon(self.surface_array):
            raise FormatError("surface must be a convex polygon with at least 3 vertices")
        for i, p in enumerate(self.connections):
            if not self.contains(p):
                raise FormatError(f"connection {i + 1} at ({p.y1}, {p.y2}) lies outside the surface")

    @property
    def k(self) -> int:
        return len(self.connections)

    @cached_property
    def surface_array(self) -> np.ndarray:
        arr = ccw_polygon([tuple(p) for p in self.surface])
        arr.setflags(write=False)
        return arr

    def contains(self, y, tol: float = BOUNDARY_TOL) -> bool:
        """Point on or inside the surface (small relative slack)."""
        y = np.asarray(tuple(y), dtype=float)
        slack = tol * bbox_diagonal(self.surface_array)
        return all(h.value(y) >= -slack for h in polygon_halfplanes(self.surface_array))


@dataclass(frozen=True)
class Sample:
    """One recorded trial: equilibrium flows and the open leak position(s).

    Two-leak samples carry ``links``: the ids of the single-leak samples taken
    at ``leaks[0]`` and ``leaks[1]`` respectively.
    """

    id: int
    flows: tuple[float, ...]
    leaks: tuple[Point, ...]
    links: tuple[int, int] | None = None

    def __post_init__(self):
        if len(self.leaks) not in (1, 2):
            raise ValueError(f"sample {self.id}: expected 1 or 2 leaks, got {len(self.leaks)}")
        if not all(np.isfinite(self.flows)):
            raise ValueError(f"sample {self.id}: non-finite flow value")
        if self.links is not None and len(self.leaks) != 2:
            raise ValueError(f"sample {self.id}: only two-leak samples carry links")

    @property
    def n_leaks(self) -> int:
        return len(self.leaks)

    @property
    def flow_array(self) -> np.ndarray:
        return np.asarray(self.flows, dtype=float)


@dataclass(frozen=True)
class Dataset:
    """Single- and two-leak samples recorded on one setup, each sorted by id."""

    setup: SetupConfig
    single: tuple[Sample, ...]
    two_leak: tuple[Sample, ...] = ()
    provenance: str = "original"
    synthetic: bool = False
    _by_id: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        single = tuple(sorted(self.single, key=lambda s: s.id))
        two = tuple(sorted(self.two_leak, key=lambda s: s.id))
        object.__setattr__(self, "single", single)
        object.__setattr__(self, "two_leak", two)
        ids = [s.id for s in single + two]
        if len(set(ids)) != len(ids):
            raise FormatError("sample ids must be unique")
        for s in single + two:
            if len(s.flows) != self.setup.k:
                raise FormatError(f"sample {s.id}: {len(s.flows)} flows for {self.setup.k} connections")
            if any(not self.setup.contains(p) for p in s.leaks):
                raise FormatError(f"sample {s.id}: leak outside the surface")
        for s in single:
            if s.n_leaks != 1:
                raise FormatError(f"sample {s.id}: single-leak list holds a {s.n_leaks}-leak sample")
        for s in two:
            if s.n_leaks != 2:
                raise FormatError(f"sample {s.id}: two-leak list holds a {s.n_leaks}-leak sample")
        object.__setattr__(self, "_by_id", {s.id: s for s in single})

    def single_by_id(self, sample_id: int) -> Sample:
        return self._by_id[sample_id]

    @property
    def singles(self) -> dict[int, Sample]:
        return dict(self._by_id)

    def missing_links(self) -> list[int]:
        """Ids of two-leak samples whose links do not resolve."""
        return [
            s.id
            for s in self.two_leak
            if s.links is None or any(lid not in self._by_id for lid in s.links)
        ]

    def check_links(self) -> None:
        missing = self.missing_links()
        if missing:
            raise MissingLink(f"two-leak samples with unresolved links: {missing}")

    def with_samples(
        self,
        single: Sequence[Sample] | None = None,
        two_leak: Sequence[Sample] | None = None,
        provenance: str | None = None,
    ) -> Dataset:
        return replace(
            self,
            single=tuple(self.single if single is None else single),
            two_leak=tuple(self.two_leak if two_leak is None else two_leak),
            provenance=self.provenance if provenance is None else provenance,
            _by_id=None,
        )
