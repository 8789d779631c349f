"""Ingest for the public OPPORTUNITY distribution.

Reads ``S<k>-*.dat`` recordings (whitespace separated, one row per 30 ms
tick), selects the IMU columns of the five body positions from the shipped
column map, and cuts sliding windows inside contiguous runs of each mapped
gesture label. Sensor dropouts (NaN) are linearly interpolated when gaps are
short, otherwise the window is rejected.
"""
from __future__ import annotations

import re
import warnings
from pathlib import Path

import numpy as np
import yaml

from ..errors import ConfigError, IngestError
from ..graphs import SensorLayout
from .dsads import cluster_of
from .samples import SampleSet, empty_sample_set

_RECORDING = re.compile(r"^S(\d+)-.*\.dat$")


def default_clusters() -> dict[str, list[int]]:
    """One subject per cluster: A=[1], B=[2], C=[3], D=[4]."""
    return {"A": [1], "B": [2], "C": [3], "D": [4]}


def load_column_map(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"column map not found: {path}")
    doc = yaml.safe_load(path.read_text())
    for key in ("columns_per_row", "label_column", "nodes", "classes"):
        if key not in doc:
            raise ConfigError(f"{path}: column map missing {key!r}")
    return doc


def interpolate_gaps(series: np.ndarray, max_gap: int) -> np.ndarray | None:
    """Fill NaN runs of at most ``max_gap`` samples linearly; None if longer."""
    bad = np.isnan(series)
    if not bad.any():
        return series
    if bad.all():
        return None
    # Longest consecutive NaN run.
    run = 0
    longest = 0
    for flag in bad:
        run = run + 1 if flag else 0
        longest = max(longest, run)
    if longest > max_gap:
        return None
    idx = np.arange(series.size)
    filled = series.copy()
    filled[bad] = np.interp(idx[bad], idx[~bad], series[~bad])
    return filled


def _windows_in_run(length: int, window_len: int, step: int):
    start = 0
    while start + window_len <= length:
        yield start
        start += step


def ingest_oppt(root, layout: SensorLayout, column_map: dict,
                clusters: dict[str, list[int]] | None = None,
                window_len: int = 64, overlap: float = 0.5,
                max_nan_gap: int = 5, dtype=np.float32) -> SampleSet:
    root = Path(root)
    clusters = clusters or default_clusters()
    cluster_names = sorted(clusters)
    n_nodes = layout.n_positions
    channels = layout.uniform_channels()
    if len(column_map["nodes"]) != n_nodes:
        raise IngestError(f"column map lists {len(column_map['nodes'])} nodes, "
                          f"layout has {n_nodes}")
    step = max(1, int(round(window_len * (1.0 - overlap))))
    label_col = int(column_map["label_column"]) - 1
    n_columns = int(column_map["columns_per_row"])
    code_to_label = {int(c["code"]): int(c["label"]) for c in column_map["classes"]}
    class_names = [c["name"] for c in
                   sorted(column_map["classes"], key=lambda c: int(c["label"]))]
    node_slices = []
    for node in column_map["nodes"]:
        first, last = int(node["first"]) - 1, int(node["last"])
        if last - first != channels:
            raise IngestError(f"node {node['name']!r} spans {last - first} "
                              f"columns, layout expects {channels}")
        node_slices.append(slice(first, last))

    recordings = sorted(p for p in root.rglob("*.dat") if _RECORDING.match(p.name))
    if not recordings:
        warnings.warn(f"no OPPORTUNITY recordings found under {root}", stacklevel=2)
        return empty_sample_set(n_nodes, channels, window_len, dtype=dtype)

    xs, ys, ds, subjects, source_idx, offsets = [], [], [], [], [], []
    sources: list[str] = []
    rejected = 0
    for path in recordings:
        subject = int(_RECORDING.match(path.name).group(1))
        cluster = cluster_of(subject, clusters)
        if cluster is None:
            continue
        try:
            rows = np.loadtxt(path, dtype=np.float64, ndmin=2)
        except ValueError as exc:
            raise IngestError(f"{path}: cannot parse recording: {exc}") from exc
        if rows.shape[1] != n_columns:
            raise IngestError(f"{path}: expected {n_columns} columns per row, "
                              f"got {rows.shape[1]}")
        labels = rows[:, label_col].astype(np.int64)
        sources.append(str(path.relative_to(root)))
        src = len(sources) - 1

        # Contiguous runs of one gesture code.
        boundaries = np.flatnonzero(np.diff(labels)) + 1
        starts = np.concatenate(([0], boundaries))
        ends = np.concatenate((boundaries, [labels.size]))
        for run_start, run_end in zip(starts, ends):
            label = code_to_label.get(int(labels[run_start]))
            if label is None:
                continue
            run = rows[run_start:run_end]
            for w in _windows_in_run(run_end - run_start, window_len, step):
                window = np.empty((n_nodes, channels, window_len))
                ok = True
                for node, sl in enumerate(node_slices):
                    chunk = run[w:w + window_len, sl].T  # [channels, T]
                    for ch in range(channels):
                        filled = interpolate_gaps(chunk[ch], max_nan_gap)
                        if filled is None:
                            ok = False
                            break
                        window[node, ch] = filled
                    if not ok:
                        break
                if not ok:
                    rejected += 1
                    continue
                xs.append(window.astype(dtype))
                ys.append(label)
                ds.append(cluster_names.index(cluster))
                subjects.append(subject)
                source_idx.append(src)
                offsets.append(run_start + w)

    if rejected:
        warnings.warn(f"rejected {rejected} windows with sensor gaps longer "
                      f"than {max_nan_gap} samples", stacklevel=2)
    if not xs:
        return empty_sample_set(n_nodes, channels, window_len, dtype=dtype)
    return SampleSet(x=np.stack(xs), y=np.array(ys), d=np.array(ds),
                     subject=np.array(subjects), sources=sources,
                     source_idx=np.array(source_idx), offset=np.array(offsets),
                     class_names=class_names)
