"""Ingest for the public DSADS distribution.

Expected tree: ``a01..a19/p1..p8/s01..s60.txt``, each file one 5-second
segment of 125 rows x 45 comma-separated reals. Columns come in blocks of
nine per sensor unit, unit order matching the shipped layout (torso, right
arm, left arm, right leg, left leg).
"""
from __future__ import annotations

import re
import warnings
from pathlib import Path

import numpy as np

from ..errors import IngestError
from ..graphs import SensorLayout
from .samples import SampleSet, empty_sample_set

SEGMENT_ROWS = 125

_ACTIVITY_DIR = re.compile(r"^a(\d{2})$")
_SUBJECT_DIR = re.compile(r"^p(\d+)$")
_SEGMENT_FILE = re.compile(r"^s\d+\.txt$")


def cluster_of(subject: int, clusters: dict[str, list[int]]) -> str | None:
    for name, members in clusters.items():
        if subject in members:
            return name
    return None


def default_clusters() -> dict[str, list[int]]:
    """Subject pairs: A=[1,2], B=[3,4], C=[5,6], D=[7,8]."""
    return {"A": [1, 2], "B": [3, 4], "C": [5, 6], "D": [7, 8]}


def ingest_dsads(root, layout: SensorLayout,
                 clusters: dict[str, list[int]] | None = None,
                 limit_segments: int | None = None,
                 dtype=np.float32) -> SampleSet:
    """Read every segment under ``root`` into windowed samples.

    Segments containing NaN cells are rejected (DSADS should contain none).
    Subjects outside the cluster map are skipped with a warning. Files are
    processed in sorted path order, so ingest is order-independent.
    """
    root = Path(root)
    clusters = clusters or default_clusters()
    cluster_names = sorted(clusters)
    n_nodes = layout.n_positions
    channels = layout.uniform_channels()
    if n_nodes * channels != 45:
        raise IngestError(f"layout describes {n_nodes}x{channels} channels; "
                          f"DSADS rows carry 45 values")

    files = []
    for act_dir in sorted(root.iterdir() if root.is_dir() else []):
        act_match = _ACTIVITY_DIR.match(act_dir.name)
        if not act_match:
            continue
        activity = int(act_match.group(1)) - 1
        for subj_dir in sorted(act_dir.iterdir()):
            subj_match = _SUBJECT_DIR.match(subj_dir.name)
            if not subj_match:
                continue
            subject = int(subj_match.group(1))
            segments = sorted(p for p in subj_dir.iterdir()
                              if _SEGMENT_FILE.match(p.name))
            if limit_segments is not None:
                segments = segments[:limit_segments]
            files.extend((activity, subject, p) for p in segments)

    if not files:
        warnings.warn(f"no DSADS segments found under {root}", stacklevel=2)
        return empty_sample_set(n_nodes, channels, SEGMENT_ROWS, dtype=dtype)

    xs, ys, ds, subjects, source_idx, offsets = [], [], [], [], [], []
    sources: list[str] = []
    skipped_subjects = set()
    rejected = 0
    for activity, subject, path in files:
        cluster = cluster_of(subject, clusters)
        if cluster is None:
            skipped_subjects.add(subject)
            continue
        try:
            segment = np.loadtxt(path, delimiter=",", dtype=np.float64,
                                 ndmin=2)
        except ValueError as exc:
            raise IngestError(f"{path}: cannot parse segment: {exc}") from exc
        if segment.shape != (SEGMENT_ROWS, 45):
            raise IngestError(f"{path}: expected {SEGMENT_ROWS} rows x 45 "
                              f"columns, got {segment.shape}")
        if np.isnan(segment).any():
            rejected += 1
            continue
        # [T, nodes*channels] -> [nodes, channels, T]
        windows = segment.reshape(SEGMENT_ROWS, n_nodes, channels)
        xs.append(windows.transpose(1, 2, 0).astype(dtype))
        ys.append(activity)
        ds.append(cluster_names.index(cluster))
        subjects.append(subject)
        sources.append(str(path.relative_to(root)))
        source_idx.append(len(sources) - 1)
        offsets.append(int(path.stem.lstrip("s")))

    if skipped_subjects:
        warnings.warn(f"subjects {sorted(skipped_subjects)} are not in the "
                      f"cluster map and were skipped", stacklevel=2)
    if rejected:
        warnings.warn(f"rejected {rejected} segments containing NaN cells",
                      stacklevel=2)
    if not xs:
        return empty_sample_set(n_nodes, channels, SEGMENT_ROWS, dtype=dtype)
    return SampleSet(x=np.stack(xs), y=np.array(ys), d=np.array(ds),
                     subject=np.array(subjects), sources=sources,
                     source_idx=np.array(source_idx), offset=np.array(offsets))
