"""Anatomical sensor graphs: three adjacency families over a sensor layout,
symmetric normalization, and the cyclic phase schedule that rotates through
them during training."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from .errors import ConfigError, GraphError, LayoutError, SingularDegreeError

SIDES = ("left", "right", "middle")


class GraphKind(str, Enum):
    INTERCONNECTED = "interconnected"
    ANALOGOUS = "analogous"
    LATERAL = "lateral"


CYCLE_ORDER = (GraphKind.INTERCONNECTED, GraphKind.ANALOGOUS, GraphKind.LATERAL)


@dataclass(frozen=True)
class SensorPosition:
    id: int
    name: str
    side: str
    links: tuple[int, ...]
    channels: int


@dataclass(frozen=True)
class SensorLayout:
    """Named sensor positions with side annotations and body-chain links."""
    positions: tuple[SensorPosition, ...]

    def __post_init__(self):
        ids = [p.id for p in self.positions]
        if ids != list(range(len(ids))):
            raise LayoutError(f"position ids must be dense 0..N-1 in order, got {ids}")
        names = [p.name for p in self.positions]
        if len(set(names)) != len(names):
            raise LayoutError(f"position names must be unique, got {names}")
        for p in self.positions:
            if p.side not in SIDES:
                raise LayoutError(f"position {p.name!r} has side {p.side!r}; "
                                  f"expected one of {SIDES}")
            if p.channels < 1:
                raise LayoutError(f"position {p.name!r} must have at least one channel")
            for link in p.links:
                if not 0 <= link < len(self.positions):
                    raise LayoutError(f"position {p.name!r} links to unknown id {link}")
                if link == p.id:
                    raise LayoutError(f"position {p.name!r} links to itself")
                if p.id not in self.positions[link].links:
                    raise LayoutError(
                        f"chain links must be symmetric: {p.name!r} -> {link} "
                        f"has no reverse link")

    @property
    def n_positions(self) -> int:
        return len(self.positions)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.positions)

    def uniform_channels(self) -> int:
        counts = {p.channels for p in self.positions}
        if len(counts) != 1:
            raise LayoutError(f"positions carry differing channel counts: {sorted(counts)}")
        return counts.pop()


def _position_from_mapping(entry) -> SensorPosition:
    try:
        return SensorPosition(
            id=int(entry["id"]),
            name=str(entry["name"]),
            side=str(entry["side"]).lower(),
            links=tuple(int(v) for v in entry.get("links", [])),
            channels=int(entry.get("channels", 1)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise LayoutError(f"malformed position entry {entry!r}: {exc}") from exc


def load_layout(path) -> SensorLayout:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"layout file not found: {path}")
    doc = yaml.safe_load(path.read_text())
    if not isinstance(doc, dict) or "positions" not in doc:
        raise LayoutError(f"{path}: layout file must define a 'positions' list")
    entries = sorted((_position_from_mapping(e) for e in doc["positions"]),
                     key=lambda p: p.id)
    return SensorLayout(positions=tuple(entries))


def builtin_layout_path(name: str) -> Path:
    candidate = resources.files("graphhar") / "layouts" / f"{name}.layout"
    with resources.as_file(candidate) as concrete:
        if not concrete.exists():
            raise ConfigError(f"no builtin layout named {name!r}")
        return Path(concrete)


def builtin_layout(name: str) -> SensorLayout:
    return load_layout(builtin_layout_path(name))


# -- adjacency construction ------------------------------------------------------

@dataclass(frozen=True)
class AnatomicalGraph:
    kind: GraphKind
    adjacency: np.ndarray       # N x N, 0/1, symmetric, zero diagonal
    normalized: np.ndarray      # D^{-1/2} (A [+ I]) D^{-1/2}

    def __post_init__(self):
        a = self.adjacency
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise GraphError(f"adjacency must be square, got {a.shape}")
        if not np.array_equal(a, a.T):
            raise GraphError("adjacency must be symmetric")


def _empty_adjacency(layout: SensorLayout) -> np.ndarray:
    n = layout.n_positions
    return np.zeros((n, n), dtype=np.int64)


def _finish(kind: GraphKind, adjacency: np.ndarray,
            add_self_loops: bool) -> AnatomicalGraph:
    return AnatomicalGraph(kind=kind, adjacency=adjacency,
                           normalized=normalize(adjacency, add_self_loops=add_self_loops))


def build_interconnected(layout: SensorLayout,
                         add_self_loops: bool = True) -> AnatomicalGraph:
    """Edges between body-chain neighbours, straight from the layout links."""
    a = _empty_adjacency(layout)
    for pos in layout.positions:
        for link in pos.links:
            a[pos.id, link] = 1
            a[link, pos.id] = 1
    return _finish(GraphKind.INTERCONNECTED, a, add_self_loops)


def _mirror_key(position: SensorPosition) -> str | None:
    if position.side not in ("left", "right"):
        return None
    tokens = position.name.lower().replace("-", "_").split("_")
    tokens = [t for t in tokens if t]
    if tokens and tokens[0] in ("left", "right"):
        tokens = tokens[1:]
    return "_".join(tokens)


def build_analogous(layout: SensorLayout,
                    add_self_loops: bool = True) -> AnatomicalGraph:
    """Edges between left/right mirror pairs, matched on the name after the
    side prefix is stripped (Right_Arm <-> Left_Arm)."""
    a = _empty_adjacency(layout)
    by_key: dict[str, dict[str, list[int]]] = {}
    for pos in layout.positions:
        key = _mirror_key(pos)
        if key is None:
            continue
        by_key.setdefault(key, {"left": [], "right": []})[pos.side].append(pos.id)
    for group in by_key.values():
        for i in group["left"]:
            for j in group["right"]:
                a[i, j] = 1
                a[j, i] = 1
    return _finish(GraphKind.ANALOGOUS, a, add_self_loops)


def build_lateral(layout: SensorLayout,
                  add_self_loops: bool = True) -> AnatomicalGraph:
    """Cliques among same-side positions (left, right, and middle each form one)."""
    a = _empty_adjacency(layout)
    for side in SIDES:
        members = [p.id for p in layout.positions if p.side == side]
        for i in members:
            for j in members:
                if i != j:
                    a[i, j] = 1
    return _finish(GraphKind.LATERAL, a, add_self_loops)


_BUILDERS = {
    GraphKind.INTERCONNECTED: build_interconnected,
    GraphKind.ANALOGOUS: build_analogous,
    GraphKind.LATERAL: build_lateral,
}


def build_graph(kind: GraphKind, layout: SensorLayout,
                add_self_loops: bool = True) -> AnatomicalGraph:
    return _BUILDERS[GraphKind(kind)](layout, add_self_loops=add_self_loops)


def build_all_graphs(layout: SensorLayout,
                     add_self_loops: bool = True) -> dict[GraphKind, AnatomicalGraph]:
    return {kind: build_graph(kind, layout, add_self_loops) for kind in CYCLE_ORDER}


def normalize(adjacency: np.ndarray, add_self_loops: bool = True) -> np.ndarray:
    """Symmetric degree normalization D^{-1/2} (A [+ I]) D^{-1/2}.

    Self-loops (the default) keep isolated nodes normalizable; without them a
    zero-degree row is a hard error rather than a silent division by zero.
    """
    a = np.asarray(adjacency, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise GraphError(f"adjacency must be square, got {a.shape}")
    if not np.isfinite(a).all():
        raise GraphError("adjacency contains non-finite entries")
    if add_self_loops:
        a = a + np.eye(a.shape[0])
    degrees = a.sum(axis=1)
    if (degrees <= 0).any():
        bad = np.flatnonzero(degrees <= 0).tolist()
        raise SingularDegreeError(
            f"nodes {bad} have zero degree; normalization needs self-loops "
            f"or additional edges")
    inv_sqrt = 1.0 / np.sqrt(degrees)
    return inv_sqrt[:, None] * a * inv_sqrt[None, :]


def identity_adjacency(n: int) -> np.ndarray:
    """Propagation operator of the graph-free baseline: each node keeps to itself."""
    return np.eye(n, dtype=np.float64)


# -- cyclic schedule -------------------------------------------------------------

@dataclass(frozen=True)
class CycleSchedule:
    """Rotates the active graph family every ``phase_len`` epochs."""
    phase_len: int
    order: tuple[GraphKind, ...] = CYCLE_ORDER

    def __post_init__(self):
        if self.phase_len < 1:
            raise ConfigError(f"phase length must be >= 1, got {self.phase_len}")


def active_graph(epoch: int, schedule: CycleSchedule) -> GraphKind:
    """Graph family in effect at ``epoch``: order[(epoch // phase_len) mod 3]."""
    if epoch < 0:
        raise ValueError(f"epoch must be non-negative, got {epoch}")
    phase = (epoch // schedule.phase_len) % len(schedule.order)
    return schedule.order[phase]
