"""Report files: a versioned JSON record plus plain-text tables and
confusion-matrix grids."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import ConfigError

REPORT_JSON = "report.json"
REPORT_TEXT = "report.txt"


def write_report_files(outdir, report_dict: dict) -> None:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / REPORT_JSON).write_text(
        json.dumps(report_dict, sort_keys=True, indent=2) + "\n")
    (outdir / REPORT_TEXT).write_text(render_report(report_dict))


def load_report(run_dir) -> dict:
    path = Path(run_dir) / REPORT_JSON
    if not path.exists():
        raise ConfigError(f"no {REPORT_JSON} under {run_dir}")
    return json.loads(path.read_text())


def _table(headers: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h)
              for i, h in enumerate(headers)]
    def fmt(cells):
        return "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()
    rule = "-" * (sum(widths) + 2 * (len(widths) - 1))
    lines = [fmt(headers), rule]
    lines.extend(fmt(r) for r in rows)
    return "\n".join(lines)


def render_accuracy_table(report: dict) -> str:
    rows = []
    for agg in report["modes"]:
        rows.append([agg["mode"],
                     f"{100.0 * agg['mean_accuracy']:.2f}",
                     f"{100.0 * agg['std_accuracy']:.2f}"])
    return _table(["Mode", "Average (%)", "Std dev (%)"], rows)


def render_runs_table(report: dict) -> str:
    rows = [[run["mode"], run["fold"], f"{100.0 * run['final_accuracy']:.2f}"]
            for run in report["runs"]]
    return _table(["Mode", "Held-out", "Accuracy (%)"], rows)


def render_confusion(matrix, class_names=None) -> str:
    matrix = np.asarray(matrix)
    n = matrix.shape[0]
    names = class_names or [str(i) for i in range(n)]
    width = max(len(str(matrix.max())) if matrix.size else 1,
                max(len(str(nm)) for nm in names))
    header = "true\\pred " + " ".join(str(nm).rjust(width) for nm in names)
    lines = [header]
    for i in range(n):
        row = " ".join(str(int(v)).rjust(width) for v in matrix[i])
        lines.append(f"{str(names[i]).rjust(9)} {row}")
    return "\n".join(lines)


def render_pearson_table(report: dict) -> str:
    # r and p are rendered verbatim from the stored values so the table can
    # be checked against the JSON record byte for byte.
    rows = []
    for agg in report["modes"]:
        for label, key in (("activity loss", "pearson_activity"),
                           ("domain loss", "pearson_domain")):
            entry = agg.get(key)
            if entry is None:
                rows.append([agg["mode"], label, "n/a", "n/a"])
            else:
                rows.append([agg["mode"], label, repr(entry[0]), repr(entry[1])])
    return _table(["Mode", "Loss component", "Pearson r", "p-value"], rows)


def render_report(report: dict) -> str:
    parts = [
        f"dataset: {report['dataset']}",
        f"schema version: {report['schema_version']}",
        "",
        "== Accuracy by mode ==",
        render_accuracy_table(report),
        "",
        "== Per-fold runs ==",
        render_runs_table(report),
        "",
        "== Loss/accuracy correlation ==",
        render_pearson_table(report),
    ]
    for agg in report["modes"]:
        parts.extend([
            "",
            f"== Confusion matrix ({agg['mode']}, all folds) ==",
            render_confusion(agg["confusion"]),
        ])
    return "\n".join(parts) + "\n"
