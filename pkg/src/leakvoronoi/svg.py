"""
Deterministic SVG 1.1 export of diagrams clipped to the surface.

Layers, back to front: ``surface``, ``cells`` (one path per nonempty cell),
``classic-edges`` (classic cell outlines over a refined diagram), ``sites``,
``projections`` (dashed leak-to-cell segments) and ``leaks`` (circles for
single-leak samples, crosses for two-leak samples). All numbers use fixed
precision, so identical inputs give identical bytes.
"""
from __future__ import annotations

from pathlib import Path
from typing import Iterable, Sequence
from xml.sax.saxutils import escape

import numpy as np

from .geometry import CellPolyhedron, VoronoiDiagram, as_xy, clip_to_surface
from .models import Sample
from .predictors import format_label
from .projection import dykstra_project
from .refined import RefinedDiagram

PX_PER_M = 50.0
MARGIN_PX = 20.0
_PALETTE = (
    "#8dd3c7", "#ffffb3", "#bebada", "#fb8072", "#80b1d3",
    "#fdb462", "#b3de69", "#fccde5", "#d9d9d9", "#bc80bd",
)


def _num(v: float) -> str:
    s = f"{v:.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


class _Frame:
    """Meters to pixels with the y axis pointing up."""

    def __init__(self, surface: np.ndarray):
        self.lo = surface.min(axis=0)
        self.hi = surface.max(axis=0)
        self.width = (self.hi[0] - self.lo[0]) * PX_PER_M + 2 * MARGIN_PX
        self.height = (self.hi[1] - self.lo[1]) * PX_PER_M + 2 * MARGIN_PX

    def xy(self, p) -> tuple[str, str]:
        x = (p[0] - self.lo[0]) * PX_PER_M + MARGIN_PX
        y = (self.hi[1] - p[1]) * PX_PER_M + MARGIN_PX
        return _num(x), _num(y)

    def path(self, poly: np.ndarray) -> str:
        pts = [self.xy(p) for p in poly]
        return "M " + " L ".join(f"{x} {y}" for x, y in pts) + " Z"


def _cells_of(diagram) -> list[tuple[tuple[int, ...], CellPolyhedron]]:
    if isinstance(diagram, VoronoiDiagram):
        return [(c.label, c) for c in diagram.cells]
    if isinstance(diagram, RefinedDiagram):
        return [(t, diagram.cell(t)) for t in diagram.nonempty_labels()]
    raise TypeError(f"cannot draw {type(diagram).__name__}")


def render_svg(
    diagram: VoronoiDiagram | RefinedDiagram,
    surface: Sequence,
    samples: Iterable[Sample] = (),
    classic: VoronoiDiagram | None = None,
    projections: Iterable[tuple[Sample, CellPolyhedron]] = (),
) -> str:
    surface = np.asarray([tuple(p) for p in surface], dtype=float)
    frame = _Frame(surface)
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_num(frame.width)}" '
        f'height="{_num(frame.height)}" viewBox="0 0 {_num(frame.width)} {_num(frame.height)}">',
        '<g id="surface" fill="none" stroke="#000000" stroke-width="2">',
        f'<path d="{frame.path(surface)}"/>',
        "</g>",
        '<g id="cells" stroke="#444444" stroke-width="1">',
    ]
    for n, (label, cell) in enumerate(_cells_of(diagram)):
        poly = clip_to_surface(cell, surface)
        if len(poly) == 0:
            continue
        colour = _PALETTE[label[0] % len(_PALETTE)]
        opacity = "1" if len(label) == 1 else ("0.9" if n % 2 == 0 else "0.6")
        out.append(
            f'<path id="cell-{"-".join(str(i + 1) for i in label)}" d="{frame.path(poly)}" '
            f'fill="{colour}" fill-opacity="{opacity}"><title>{escape(format_label(label))}</title></path>'
        )
    out.append("</g>")

    if classic is not None:
        out.append('<g id="classic-edges" fill="none" stroke="#d62728" stroke-width="2.5">')
        for cell in classic.cells:
            poly = clip_to_surface(cell, surface)
            if len(poly):
                out.append(f'<path d="{frame.path(poly)}"/>')
        out.append("</g>")

    sites = diagram.sites.coords
    out.append('<g id="sites" fill="#000000">')
    for i, p in enumerate(sites):
        x, y = frame.xy(p)
        out.append(f'<circle cx="{x}" cy="{y}" r="4"><title>p_{i + 1}</title></circle>')
    out.append("</g>")

    out.append('<g id="projections" stroke="#1f77b4" stroke-width="1.5" stroke-dasharray="4 3">')
    for sample, cell in projections:
        for leak in sample.leaks:
            z = dykstra_project(as_xy(leak), cell).point
            (x1, y1), (x2, y2) = frame.xy(as_xy(leak)), frame.xy(z.as_array())
            out.append(f'<line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}"/>')
    out.append("</g>")

    out.append('<g id="leaks" fill="none" stroke="#1f77b4" stroke-width="1.5">')
    for sample in samples:
        for leak in sample.leaks:
            x, y = (float(v) for v in frame.xy(as_xy(leak)))
            if sample.n_leaks == 1:
                out.append(f'<circle cx="{_num(x)}" cy="{_num(y)}" r="3"/>')
            else:
                out.append(
                    f'<path d="M {_num(x - 3)} {_num(y - 3)} L {_num(x + 3)} {_num(y + 3)} '
                    f'M {_num(x - 3)} {_num(y + 3)} L {_num(x + 3)} {_num(y - 3)}"/>'
                )
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def export_svg(
    diagram: VoronoiDiagram | RefinedDiagram,
    surface: Sequence,
    path: str | Path,
    samples: Iterable[Sample] = (),
    classic: VoronoiDiagram | None = None,
    projections: Iterable[tuple[Sample, CellPolyhedron]] = (),
) -> None:
    Path(path).write_text(render_svg(diagram, surface, samples, classic, projections))
