"""Columnar on-disk cache for ingested or generated sample sets."""
from __future__ import annotations

import numpy as np

from ..container import read_container, write_container
from .samples import SampleSet

KIND = "graphhar-samples"


def save_samples(path, samples: SampleSet, extra_meta: dict | None = None) -> None:
    meta = {
        "counts": {"samples": len(samples)},
        "shape": {"n_nodes": samples.n_nodes, "channels": samples.n_channels,
                  "window_len": samples.window_len},
        "sources": samples.sources,
        "class_names": list(samples.class_names) if samples.class_names else None,
    }
    if extra_meta:
        meta["extra"] = extra_meta
    write_container(path, KIND, meta, {
        "x": samples.x, "y": samples.y, "d": samples.d,
        "subject": samples.subject, "source_idx": samples.source_idx,
        "offset": samples.offset,
    })


def load_samples(path) -> SampleSet:
    meta, arrays = read_container(path, expect_kind=KIND)
    class_names = meta.get("class_names")
    return SampleSet(x=arrays["x"], y=arrays["y"], d=arrays["d"],
                     subject=arrays["subject"], sources=list(meta["sources"]),
                     source_idx=arrays["source_idx"], offset=arrays["offset"],
                     class_names=tuple(class_names) if class_names else None)


def load_samples_meta(path) -> dict:
    meta, _ = read_container(path, expect_kind=KIND)
    return meta
