"""Leave-one-cluster-out splits with dense held-in domain labels."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError
from .samples import SampleSet


@dataclass(frozen=True)
class LosoSplit:
    held_out: str
    train_clusters: tuple[str, ...]
    train_idx: np.ndarray
    test_idx: np.ndarray
    train_domains: np.ndarray   # dense 0..K-1 labels aligned with train_idx

    @property
    def n_domains(self) -> int:
        return len(self.train_clusters)


def make_loso_splits(samples: SampleSet,
                     clusters: dict[str, list[int]]) -> list[LosoSplit]:
    """One fold per cluster, held out in sorted cluster-name order.

    Domain labels are re-indexed densely over the training clusters of each
    fold, so the discriminator always sees labels 0..K-1.
    """
    if len(clusters) < 2:
        raise ConfigError(f"need at least two clusters to hold one out, "
                          f"got {len(clusters)}")
    names = sorted(clusters)
    members = {name: set(clusters[name]) for name in names}
    seen = set()
    for name in names:
        if members[name] & seen:
            raise ConfigError(f"cluster {name!r} shares subjects with another cluster")
        seen |= members[name]

    subject_cluster = np.full(len(samples), -1, dtype=np.int64)
    for ci, name in enumerate(names):
        for subject in members[name]:
            subject_cluster[samples.subject == subject] = ci
    uncovered = int((subject_cluster < 0).sum())
    if uncovered:
        warnings.warn(f"{uncovered} samples belong to subjects outside the "
                      f"cluster map and are excluded from every fold", stacklevel=2)

    splits = []
    for ci, held_out in enumerate(names):
        train_clusters = tuple(n for n in names if n != held_out)
        train_mask = (subject_cluster >= 0) & (subject_cluster != ci)
        test_mask = subject_cluster == ci
        train_idx = np.flatnonzero(train_mask)
        remap = {names.index(n): k for k, n in enumerate(train_clusters)}
        train_domains = np.array([remap[c] for c in subject_cluster[train_idx]],
                                 dtype=np.int64)
        splits.append(LosoSplit(held_out=held_out, train_clusters=train_clusters,
                                train_idx=train_idx,
                                test_idx=np.flatnonzero(test_mask),
                                train_domains=train_domains))
    return splits
