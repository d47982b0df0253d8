"""
Command-line front end.

Exit codes: 0 success, 1 invalid input (setup, data or geometry), 2 usage
error, 3 the refined prediction is INVALID.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import plotting
from .data_io import Report, export_svg, load_dataset, load_setup, save_dataset, save_report
from .errors import LeakVoronoiError
from .evaluation import (
    OUTLIER_THRESHOLD,
    MultiLeakResult,
    SingleLeakResult,
    clean_outliers,
    evaluate_multi_leak,
    evaluate_simultaneous,
    evaluate_single_leak,
    invalid_prediction_analysis,
)
from .geometry import clip_to_surface, voronoi_diagram
from .predictors import ClassicPredictor, RefinedPredictor, format_label, format_tuple
from .refined import EMPTINESS_METHOD, refined_diagram
from .synthesis import FlowModel, generate_dataset

EXIT_OK, EXIT_INPUT, EXIT_USAGE, EXIT_INVALID = 0, 1, 2, 3


class _UsageError(Exception):
    pass


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="leakvoronoi", description="Voronoi-based leak localization.")
    sub = p.add_subparsers(dest="command", required=True)

    diagram = sub.add_parser("diagram", help="diagram operations")
    dsub = diagram.add_subparsers(dest="action", required=True)
    build = dsub.add_parser("build", help="build a classic or refined diagram")
    build.add_argument("--setup", required=True)
    build.add_argument("--order", type=int, default=1)
    build.add_argument("--svg")
    build.add_argument("--json")

    pred = sub.add_parser("predict", help="predict the leak cell for one flow vector")
    pred.add_argument("--setup", required=True)
    pred.add_argument("--flows", required=True)
    pred.add_argument("--refined", action="store_true")

    ev = sub.add_parser("evaluate", help="evaluate a predictor on a dataset")
    ev.add_argument("--setup", required=True)
    ev.add_argument("--data", required=True)
    ev.add_argument("--refined", action="store_true")
    ev.add_argument("--multi", action="store_true")
    ev.add_argument("--clean", action="store_true")
    ev.add_argument("--report")

    syn = sub.add_parser("synth", help="generate a synthetic dataset")
    syn.add_argument("--setup", required=True)
    syn.add_argument("--n-single", type=int, required=True)
    syn.add_argument("--n-two", type=int, required=True)
    syn.add_argument("--seed", type=int, required=True)
    syn.add_argument("--out", required=True)
    return p


# ---------------------------------------------------------------------------
# diagram build
# ---------------------------------------------------------------------------


def _meeting_surface(cells, setup) -> int:
    """Cells whose intersection with the surface has positive area."""
    return sum(len(clip_to_surface(c, setup.surface_array)) > 0 for c in cells)


def _cmd_build(args) -> int:
    setup = load_setup(args.setup)
    k = setup.k
    if not 1 <= args.order <= k:
        raise _UsageError(f"--order must be between 1 and {k}")
    classic = voronoi_diagram(setup.connections)
    if args.order == 1:
        entries = [(c.label, c, False) for c in classic.cells]
        drawn = classic
    else:
        rvd = refined_diagram(setup.connections, args.order)
        entries = [(t, rvd.cell(t), rvd.is_empty(t)) for t in rvd]
        drawn = rvd
    n_nonempty = sum(not e for _, _, e in entries)
    print(f"setup = {setup.name}")
    print(f"order = {args.order}")
    print(f"cells = {len(entries)}")
    print(f"nonempty = {n_nonempty}")
    print(f"meeting_surface = {_meeting_surface([c for _, c, e in entries if not e], setup)}")
    if args.order > 1:
        print(f"emptiness_method = {EMPTINESS_METHOD}")
    print("tuple,nonempty,halfplanes")
    for t, cell, empty in entries:
        print(f"{format_tuple(t)},{'false' if empty else 'true'},{len(cell)}")

    if args.json:
        doc = {
            "setup": setup.name,
            "order": args.order,
            "emptiness_method": EMPTINESS_METHOD if args.order > 1 else None,
            "sites": [[float(a), float(b)] for a, b in setup.connections.coords],
            "cells": [
                {
                    "tuple": [i + 1 for i in t],
                    "nonempty": not empty,
                    "halfplanes": [{"normal": list(h.normal), "offset": h.offset} for h in cell.halfplanes],
                    "polygon": [] if empty else clip_to_surface(cell, setup.surface_array).tolist(),
                }
                for t, cell, empty in entries
            ],
        }
        Path(args.json).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    if args.svg:
        export_svg(drawn, setup.surface_array, args.svg, classic=classic if args.order > 1 else None)
    return EXIT_OK


# ---------------------------------------------------------------------------
# predict
# ---------------------------------------------------------------------------


def _cmd_predict(args) -> int:
    setup = load_setup(args.setup)
    try:
        flows = [float(v) for v in args.flows.split(",")]
    except ValueError:
        raise _UsageError(f"--flows must be comma-separated numbers, got {args.flows!r}") from None
    if len(flows) != setup.k:
        raise _UsageError(f"--flows has {len(flows)} values but the setup has {setup.k} connections")
    if not np.all(np.isfinite(flows)):
        raise _UsageError("--flows values must be finite")
    if args.refined:
        pred = RefinedPredictor(refined_diagram(setup.connections, 2)).predict(flows)
    else:
        pred = ClassicPredictor(voronoi_diagram(setup.connections)).predict(flows)
    print(pred)
    return EXIT_OK if pred.valid else EXIT_INVALID


# ---------------------------------------------------------------------------
# evaluate
# ---------------------------------------------------------------------------


def _metrics_values(m) -> dict:
    return {
        "samples": m.n_samples,
        "correct": m.n_correct,
        "incorrect": m.n_incorrect,
        "invalid": m.n_invalid,
        "accuracy": m.accuracy,
        "mean_dist_full_cm": m.mean_dist_full_cm,
        "mean_dist_incorrect_cm": m.mean_dist_incorrect_cm,
        "no_incorrect": m.no_incorrect,
    }


def _add_confusion(report: Report, tag: str, res: SingleLeakResult) -> None:
    header = ["truth"] + [format_label(c) for c in res.confusion.columns]
    for name, cm in (("counts", res.confusion), ("column", res.confusion_column), ("row", res.confusion_row)):
        rows = [[format_label(lab)] + list(vals) for lab, vals in zip(cm.labels, cm.values.tolist())]
        if name == "counts":
            rows = [[r[0]] + [int(v) for v in r[1:]] for r in rows]
        report.add_table(f"confusion {name} {tag}", header, rows)
    report.add_values(
        f"confusion summary {tag}",
        {
            "mean_precision": res.confusion_column.mean_diagonal(),
            "mean_recall": res.confusion_row.mean_diagonal(),
            "on_boundary_ids": " ".join(str(r.sample_id) for r in res.records if r.on_boundary) or "-",
        },
    )


def _add_single(report: Report, tag: str, res: SingleLeakResult) -> None:
    report.add_values(f"metrics {tag}", _metrics_values(res.metrics))
    _add_confusion(report, tag, res)


def _add_multi(report: Report, tag: str, res: MultiLeakResult) -> None:
    report.add_values(f"step1 {tag}", _metrics_values(res.step1))
    if res.step2 is None:
        report.add_values(f"step2 {tag}", {"samples": 0})
    else:
        report.add_values(f"step2 {tag}", _metrics_values(res.step2))
    report.add_values(f"ambiguity {tag}", {"both_leaks_in_step1_cell": res.ambiguous_fixes})


def _figures(stem: Path, setup, predictor, single: SingleLeakResult | None, analysis) -> list[Path]:
    paths = []
    if single is not None:
        paths.append(plotting.plot_confusion(single.confusion_column, f"{stem}_confusion_column.png",
                                             f"{predictor.name}: column-normalized (precision)"))
        paths.append(plotting.plot_confusion(single.confusion_row, f"{stem}_confusion_row.png",
                                             f"{predictor.name}: row-normalized (recall)"))
        ok = np.array([r.leak for r in single.records if r.correct]).reshape(-1, 2)
        bad = np.array([r.leak for r in single.records if not r.correct]).reshape(-1, 2)
        if predictor.name == "classic":
            cells = [(c.label, c) for c in predictor.diagram.cells]
        else:
            cells = [(t, predictor.diagram.cell(t)) for t in predictor.diagram.nonempty_labels()]
        paths.append(plotting.plot_map(setup.surface_array, cells, setup.connections.coords, ok, bad,
                                       f"{stem}_map.png", f"{predictor.name} predictor"))
    if analysis is not None and analysis.histogram:
        paths.append(plotting.plot_invalid_histogram(analysis, f"{stem}_invalid.png"))
    return paths


def _cmd_evaluate(args) -> int:
    setup = load_setup(args.setup)
    data = load_dataset(args.data, setup)
    classic = voronoi_diagram(setup.connections)
    if args.refined:
        predictor = RefinedPredictor(refined_diagram(setup.connections, 2))
    else:
        predictor = ClassicPredictor(classic)

    cleaned, outliers = clean_outliers(data, classic, OUTLIER_THRESHOLD)
    runs = [("original", data)] + ([("cleaned", cleaned)] if args.clean else [])

    report = Report()
    run = {
        "setup": setup.name,
        "data": Path(args.data).name,
        "predictor": predictor.name,
        "task": "multi-leak" if args.multi else "single-leak",
        "synthetic": data.synthetic,
        "single_leak_samples": len(data.single),
        "two_leak_samples": len(data.two_leak),
    }
    if data.synthetic:
        run["note"] = "synthetic data: flows come from a stand-in decay model, not measurements"
    if args.refined:
        run["emptiness_method"] = EMPTINESS_METHOD
        nonempty = predictor.diagram.nonempty_labels()
        run["nonempty_cells"] = len(nonempty)
        run["cells_meeting_surface"] = _meeting_surface([predictor.diagram.cell(t) for t in nonempty], setup)
    report.add_values("run", run)
    report.add_values(
        "outliers",
        {
            "threshold_m": outliers.threshold,
            "single_ids": " ".join(str(i) for i, _ in outliers.single) or "-",
            "two_leak_ids": " ".join(str(i) for i, _ in outliers.two_leak) or "-",
            "cascade_ids": " ".join(str(i) for i in outliers.cascade) or "-",
            "applied": args.clean,
        },
    )
    if args.clean:
        report.add_values(
            "cleaning",
            {
                "removed_ids": " ".join(str(i) for i in outliers.removed_ids) or "-",
                "single_before": len(data.single),
                "single_after": len(cleaned.single),
                "two_leak_before": len(data.two_leak),
                "two_leak_after": len(cleaned.two_leak),
            },
        )

    last_single = None
    analysis = None
    for tag, ds in runs:
        if args.multi:
            _add_multi(report, tag, evaluate_multi_leak(ds, predictor))
            if args.refined:
                analysis = invalid_prediction_analysis(ds, predictor, classic)
                report.add_values(
                    f"invalid {tag}",
                    {
                        "total": analysis.total,
                        "observed_categories": len(analysis.histogram),
                        "absent_categories": " ".join(format_tuple(t) for t in analysis.absent) or "-",
                        **analysis.breakdown,
                    },
                )
                report.add_table(
                    f"invalid histogram {tag}",
                    ["tuple", "count"],
                    [[format_tuple(t), c] for t, c in analysis.histogram.items()],
                )
            else:
                sim = evaluate_simultaneous(ds, classic)
                report.add_values(
                    f"simultaneous {tag}",
                    {"samples": sim.n_samples, "both": sim.both, "one": sim.one, "neither": sim.neither},
                )
        else:
            last_single = evaluate_single_leak(ds, predictor)
            _add_single(report, tag, last_single)

    text = report.render()
    sys.stdout.write(text)
    if args.report:
        save_report(text, args.report)
        stem = Path(args.report).with_suffix("")
        for p in _figures(stem, setup, predictor, last_single, analysis):
            print(f"figure = {p}", file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------------------
# synth
# ---------------------------------------------------------------------------


def _cmd_synth(args) -> int:
    if args.n_single < 1 or args.n_two < 0:
        raise _UsageError("--n-single must be positive and --n-two non-negative")
    if args.n_two and args.n_single < 2:
        raise _UsageError("two-leak samples need --n-single of at least 2")
    setup = load_setup(args.setup)
    ds = generate_dataset(setup, args.n_single, args.n_two, FlowModel(), seed=args.seed)
    save_dataset(ds, args.out)
    print(f"wrote {len(ds.single)} single-leak and {len(ds.two_leak)} two-leak synthetic samples to {args.out}")
    return EXIT_OK


_COMMANDS = {"predict": _cmd_predict, "evaluate": _cmd_evaluate, "synth": _cmd_synth}


def main(argv: Sequence[str] | None = None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handler = _cmd_build if args.command == "diagram" else _COMMANDS[args.command]
    try:
        return handler(args)
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"leakvoronoi: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (LeakVoronoiError, ValueError, OSError) as exc:
        print(f"leakvoronoi: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
