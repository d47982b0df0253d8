"""
Setup files, dataset CSV files and text reports.

Setup file (``#`` starts a comment)::

    name = wing
    [surface]
    0, 0
    16, 0
    ...
    [connections]
    0.4, 4.8
    ...

Dataset file: a ``#``-prefixed header ``schema=1;k=<k>;provenance=...;synthetic=...``
followed by one comma-separated sample per line::

    id, n_leaks, y1_1, y2_1 [, y1_2, y2_2], x_1, ..., x_k [, link_id_1, link_id_2]

Connections are numbered in setup order, starting at 1. Floats are written
with ``repr`` so files round-trip exactly.

Datasets in other layouts load through an adapter registered with
:func:`register_adapter`; an adapter is a callable ``(path, setup) -> Dataset``
selected by ``load_dataset(path, setup, fmt=name)``.
"""
from __future__ import annotations

import csv
import io
import logging
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from .errors import FormatError
from .geometry import Point, SiteSet
from .models import Dataset, Sample, SetupConfig

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1


# ---------------------------------------------------------------------------
# Setup
# ---------------------------------------------------------------------------


def _parse_pair(text: str, line: int) -> Point:
    parts = [p for p in text.replace(",", " ").split() if p]
    if len(parts) != 2:
        raise FormatError(f"expected two coordinates, got {text!r}", line)
    try:
        return Point(float(parts[0]), float(parts[1]))
    except ValueError as exc:
        raise FormatError(f"bad coordinate pair {text!r}: {exc}", line) from None


def parse_setup(text: str) -> SetupConfig:
    name = "setup"
    section = None
    lists: dict[str, list[Point]] = {"surface": [], "connections": []}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower()
            if section not in lists:
                raise FormatError(f"unknown section [{section}]", lineno)
            continue
        if "=" in line and section is None:
            key, value = (s.strip() for s in line.split("=", 1))
            if key != "name":
                raise FormatError(f"unknown key {key!r}", lineno)
            name = value
            continue
        if section is None:
            raise FormatError(f"coordinates outside a section: {line!r}", lineno)
        lists[section].append(_parse_pair(line, lineno))
    try:
        return SetupConfig(name, tuple(lists["surface"]), SiteSet(lists["connections"] or np.empty((0, 2))))
    except ValueError as exc:
        raise FormatError(f"invalid setup: {exc}") from None


def load_setup(path: str | Path) -> SetupConfig:
    return parse_setup(Path(path).read_text())


def format_setup(setup: SetupConfig) -> str:
    lines = [f"name = {setup.name}", "[surface]"]
    lines += [f"{p.y1!r}, {p.y2!r}" for p in setup.surface]
    lines.append("[connections]")
    lines += [f"{p.y1!r}, {p.y2!r}" for p in setup.connections]
    return "\n".join(lines) + "\n"


def save_setup(setup: SetupConfig, path: str | Path) -> None:
    Path(path).write_text(format_setup(setup))


# ---------------------------------------------------------------------------
# Dataset
# ---------------------------------------------------------------------------


def _header(dataset: Dataset) -> str:
    return (
        f"# schema={SCHEMA_VERSION};k={dataset.setup.k};provenance={dataset.provenance};"
        f"synthetic={'true' if dataset.synthetic else 'false'}"
    )


def _parse_header(line: str, lineno: int) -> dict[str, str]:
    fields = {}
    for item in line.lstrip("#").strip().split(";"):
        if "=" not in item:
            raise FormatError(f"malformed header item {item!r}", lineno)
        key, value = (s.strip() for s in item.split("=", 1))
        fields[key] = value
    return fields


def format_dataset(dataset: Dataset) -> str:
    buf = io.StringIO()
    buf.write(_header(dataset) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    for s in sorted(dataset.single + dataset.two_leak, key=lambda s: s.id):
        row = [str(s.id), str(s.n_leaks)]
        for p in s.leaks:
            row += [repr(p.y1), repr(p.y2)]
        row += [repr(float(v)) for v in s.flows]
        if s.links is not None:
            row += [str(s.links[0]), str(s.links[1])]
        writer.writerow(row)
    return buf.getvalue()


def save_dataset(dataset: Dataset, path: str | Path) -> None:
    Path(path).write_text(format_dataset(dataset))


def _parse_row(row: list[str], k: int, lineno: int) -> Sample:
    try:
        sid, n = int(row[0]), int(row[1])
    except (ValueError, IndexError):
        raise FormatError("row must start with integer id and leak count", lineno) from None
    if n not in (1, 2):
        raise FormatError(f"leak count must be 1 or 2, got {n}", lineno)
    expected = 2 + 2 * n + k
    if len(row) not in ((expected,) if n == 1 else (expected, expected + 2)):
        raise FormatError(f"expected {expected} fields for a {n}-leak row with k={k}, got {len(row)}", lineno)
    try:
        coords = [float(v) for v in row[2 : 2 + 2 * n]]
        flows = tuple(float(v) for v in row[2 + 2 * n : expected])
        links = (int(row[expected]), int(row[expected + 1])) if len(row) > expected else None
        leaks = tuple(Point(coords[2 * m], coords[2 * m + 1]) for m in range(n))
        return Sample(sid, flows, leaks, links)
    except ValueError as exc:
        raise FormatError(str(exc), lineno) from None


def parse_dataset(text: str, setup: SetupConfig) -> Dataset:
    lines = text.splitlines()
    if not lines or not lines[0].lstrip().startswith("#"):
        raise FormatError("missing dataset header", 1)
    meta = _parse_header(lines[0], 1)
    if meta.get("schema") != str(SCHEMA_VERSION):
        raise FormatError(f"unsupported schema {meta.get('schema')!r}", 1)
    if meta.get("k") != str(setup.k):
        raise FormatError(f"dataset has k={meta.get('k')} but the setup has {setup.k} connections", 1)
    single, two = [], []
    for lineno, row in enumerate(csv.reader(lines), start=1):
        if lineno == 1 or not row or not "".join(row).strip() or row[0].lstrip().startswith("#"):
            continue
        sample = _parse_row([c.strip() for c in row], setup.k, lineno)
        (single if sample.n_leaks == 1 else two).append(sample)
    for s in two:
        if s.links is None:
            log.warning("two-leak sample %d has no links (MissingLink)", s.id)
    dataset = Dataset(
        setup,
        tuple(single),
        tuple(two),
        provenance=meta.get("provenance", "original"),
        synthetic=meta.get("synthetic", "false") == "true",
    )
    missing = dataset.missing_links()
    if missing:
        log.warning("two-leak samples with unresolved links: %s", missing)
    return dataset


def _load_canonical(path: str | Path, setup: SetupConfig) -> Dataset:
    return parse_dataset(Path(path).read_text(), setup)


_ADAPTERS: dict[str, Callable[[str | Path, SetupConfig], Dataset]] = {"canonical": _load_canonical}


def register_adapter(name: str, loader: Callable[[str | Path, SetupConfig], Dataset]) -> None:
    _ADAPTERS[name] = loader


def load_dataset(path: str | Path, setup: SetupConfig, fmt: str = "canonical") -> Dataset:
    try:
        loader = _ADAPTERS[fmt]
    except KeyError:
        raise ValueError(f"no dataset adapter named {fmt!r}") from None
    return loader(path, setup)


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


class Report:
    """Deterministic sectioned text: ``[section]`` headers, ``key = value``
    lines and comma-separated tables."""

    def __init__(self):
        self._sections: list[tuple[str, list[str]]] = []

    def section(self, name: str) -> list[str]:
        lines: list[str] = []
        self._sections.append((name, lines))
        return lines

    def add_values(self, name: str, values: dict) -> None:
        self.section(name).extend(f"{k} = {_fmt(v)}" for k, v in values.items())

    def add_table(self, name: str, header: Iterable[str], rows: Iterable[Iterable]) -> None:
        lines = self.section(name)
        lines.append(",".join(header))
        lines.extend(",".join(_fmt(v) for v in row) for row in rows)

    def render(self) -> str:
        return "\n".join(f"[{name}]\n" + "\n".join(lines) + "\n" for name, lines in self._sections)


def parse_report(text: str) -> dict[str, list[str]]:
    """Split a rendered report back into ``{section: lines}``."""
    out: dict[str, list[str]] = {}
    current = None
    for line in text.splitlines():
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1]
            out[current] = []
        elif line and current is not None:
            out[current].append(line)
    return out


def report_values(lines: list[str]) -> dict[str, str]:
    return dict(tuple(s.strip() for s in ln.split("=", 1)) for ln in lines if "=" in ln)


def save_report(report: Report | str, path: str | Path) -> None:
    text = report.render() if isinstance(report, Report) else report
    Path(path).write_text(text)


from .svg import export_svg, render_svg  # noqa: E402  re-exported for callers of this module
