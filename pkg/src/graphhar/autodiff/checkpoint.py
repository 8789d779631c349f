"""Parameter checkpoints: name path -> shape + raw little-endian values."""
from __future__ import annotations

import numpy as np

from ..container import read_container, write_container
from ..errors import CheckpointError
from .params import ParameterStore

KIND = "graphhar-params"


def save_checkpoint(path, store: ParameterStore, meta: dict | None = None) -> None:
    arrays = {p.name: p.value.data for p in store}
    meta = dict(meta or {})
    meta["learnable"] = {p.name: bool(p.learnable) for p in store}
    write_container(path, KIND, meta, arrays)


def load_checkpoint(path, store: ParameterStore) -> dict:
    """Restore parameter values in place; returns the checkpoint meta."""
    meta, arrays = read_container(path, expect_kind=KIND)
    missing = [name for name in store.names() if name not in arrays]
    extra = [name for name in arrays if name not in store]
    if missing or extra:
        raise CheckpointError(
            f"checkpoint does not match the model: missing={missing}, unexpected={extra}")
    for param in store:
        stored = arrays[param.name]
        if stored.shape != param.value.data.shape:
            raise CheckpointError(
                f"shape mismatch for {param.name!r}: checkpoint {stored.shape}, "
                f"model {param.value.data.shape}")
        # In-place copy keeps aliases (e.g. batch-norm running state) intact.
        param.value.data[...] = stored.astype(param.value.data.dtype)
    return meta


def read_checkpoint_meta(path) -> dict:
    meta, _ = read_container(path, expect_kind=KIND)
    return meta
