"""Windowed multi-sensor samples and the columnar store that holds them."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import IngestError, ShapeError


@dataclass(frozen=True)
class WindowedSample:
    """One fixed-length window: [n_nodes, channels, window_len] plus labels."""
    x: np.ndarray
    y: int                # activity class
    d: int                # source-user-domain (cluster) label
    subject: int
    source: str           # originating file, or a generator tag
    offset: int           # segment/window index within the source


class SampleSet:
    """Columnar set of windowed samples; immutable by convention."""

    def __init__(self, x: np.ndarray, y: np.ndarray, d: np.ndarray,
                 subject: np.ndarray, sources: list[str],
                 source_idx: np.ndarray, offset: np.ndarray,
                 class_names: tuple[str, ...] | None = None):
        self.x = x
        self.y = np.asarray(y, dtype=np.int64)
        self.d = np.asarray(d, dtype=np.int64)
        self.subject = np.asarray(subject, dtype=np.int64)
        self.sources = list(sources)
        self.source_idx = np.asarray(source_idx, dtype=np.int64)
        self.offset = np.asarray(offset, dtype=np.int64)
        self.class_names = tuple(class_names) if class_names else None
        self.validate()

    def __len__(self) -> int:
        return self.x.shape[0]

    def __getitem__(self, i: int) -> WindowedSample:
        return WindowedSample(x=self.x[i], y=int(self.y[i]), d=int(self.d[i]),
                              subject=int(self.subject[i]),
                              source=self.sources[self.source_idx[i]],
                              offset=int(self.offset[i]))

    @property
    def n_nodes(self) -> int:
        return self.x.shape[1]

    @property
    def n_channels(self) -> int:
        return self.x.shape[2]

    @property
    def window_len(self) -> int:
        return self.x.shape[3]

    @property
    def n_classes(self) -> int:
        return int(self.y.max()) + 1 if len(self) else 0

    def validate(self):
        if self.x.ndim != 4:
            raise ShapeError(f"sample data must be [n, nodes, channels, time], "
                             f"got {self.x.shape}")
        n = self.x.shape[0]
        for name, arr in (("y", self.y), ("d", self.d), ("subject", self.subject),
                          ("source_idx", self.source_idx), ("offset", self.offset)):
            if arr.shape != (n,):
                raise ShapeError(f"column {name} must have length {n}, got {arr.shape}")
        if n and not np.isfinite(self.x).all():
            raise IngestError("sample data contains non-finite values")
        if n and (self.y.min() < 0 or self.d.min() < 0):
            raise IngestError("labels must be non-negative")
        if n and (self.source_idx.min() < 0
                  or self.source_idx.max() >= len(self.sources)):
            raise IngestError("source index out of range")

    def subset(self, indices: np.ndarray) -> "SampleSet":
        indices = np.asarray(indices)
        return SampleSet(x=self.x[indices], y=self.y[indices], d=self.d[indices],
                         subject=self.subject[indices], sources=self.sources,
                         source_idx=self.source_idx[indices],
                         offset=self.offset[indices], class_names=self.class_names)


def empty_sample_set(n_nodes: int, channels: int, window_len: int,
                     dtype=np.float32) -> SampleSet:
    return SampleSet(x=np.zeros((0, n_nodes, channels, window_len), dtype=dtype),
                     y=np.zeros(0), d=np.zeros(0), subject=np.zeros(0),
                     sources=[], source_idx=np.zeros(0), offset=np.zeros(0))


@dataclass
class ChannelStats:
    """Per-(node, channel) mean and standard deviation."""
    mean: np.ndarray  # [nodes, channels]
    std: np.ndarray


def channel_stats(x: np.ndarray) -> ChannelStats:
    """Statistics over samples and time for each node/channel pair."""
    mean = x.mean(axis=(0, 3))
    std = x.std(axis=(0, 3))
    return ChannelStats(mean=mean, std=std)


def apply_zscore(x: np.ndarray, stats: ChannelStats) -> np.ndarray:
    std = np.where(stats.std > 0, stats.std, 1.0)
    return (x - stats.mean[None, :, :, None]) / std[None, :, :, None]
