"""Self-describing binary container used by checkpoints and sample caches.

Layout: magic bytes, a little-endian uint32 header length, a UTF-8 JSON
header, then the raw array payloads in header order. Arrays are stored
little-endian regardless of host byte order.
"""
from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .errors import CheckpointError

MAGIC = b"GHBIN\x00"
FORMAT_VERSION = 1


def _le_dtype(dtype: np.dtype) -> str:
    code = dtype.newbyteorder("<").str
    return code


def write_container(path, kind: str, meta: dict, arrays: dict[str, np.ndarray]) -> None:
    entries = []
    for name, arr in arrays.items():
        entries.append({
            "name": name,
            "dtype": _le_dtype(arr.dtype),
            "shape": list(arr.shape),
        })
    header = {
        "format_version": FORMAT_VERSION,
        "kind": kind,
        "meta": meta,
        "arrays": entries,
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        for name, arr in arrays.items():
            fh.write(np.ascontiguousarray(arr).astype(_le_dtype(arr.dtype)).tobytes())


def read_container(path, expect_kind: str | None = None) -> tuple[dict, dict[str, np.ndarray]]:
    path = Path(path)
    with open(path, "rb") as fh:
        magic = fh.read(len(MAGIC))
        if magic != MAGIC:
            raise CheckpointError(f"{path}: not a container file (bad magic)")
        (hlen,) = struct.unpack("<I", fh.read(4))
        header = json.loads(fh.read(hlen).decode("utf-8"))
        if header.get("format_version") != FORMAT_VERSION:
            raise CheckpointError(
                f"{path}: unsupported format version {header.get('format_version')}")
        if expect_kind is not None and header.get("kind") != expect_kind:
            raise CheckpointError(
                f"{path}: expected kind {expect_kind!r}, found {header.get('kind')!r}")
        arrays = {}
        for entry in header["arrays"]:
            dtype = np.dtype(entry["dtype"])
            shape = tuple(entry["shape"])
            count = int(np.prod(shape)) if shape else 1
            raw = fh.read(count * dtype.itemsize)
            if len(raw) != count * dtype.itemsize:
                raise CheckpointError(f"{path}: truncated payload for {entry['name']!r}")
            arrays[entry["name"]] = np.frombuffer(raw, dtype=dtype).reshape(shape).copy()
    return header["meta"], arrays
