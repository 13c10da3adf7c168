"""Binary feature-store files with JSON sidecars.

Layout (little-endian):

    magic "RSFS" | u8 version | u8 tag length | tag bytes (ascii)
    | u32 dim | u32 count | count*dim float32 row-major

The sidecar `<path>.json` maps each row to its source: arbitrary
JSON-serializable dicts, written with sorted keys and no timestamps so
identical inputs produce byte-identical files.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .errors import DataError

MAGIC = b"RSFS"
VERSION = 1


def sidecar_path(path) -> Path:
    p = Path(path)
    return p.with_name(p.name + ".json")


def save_feature_store(path, tag: str, matrix: np.ndarray, metadata: list) -> None:
    """Write a float32 feature matrix and its row metadata sidecar."""
    mat = np.ascontiguousarray(np.asarray(matrix, dtype=np.float32))
    if mat.ndim != 2:
        raise DataError(f"feature matrix must be 2-D, got shape {mat.shape}")
    if len(metadata) != mat.shape[0]:
        raise DataError(f"{len(metadata)} metadata rows for {mat.shape[0]} feature rows")
    tag_b = tag.encode("ascii")
    if not 0 < len(tag_b) < 256:
        raise DataError("tag must be 1..255 ascii characters")
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with open(p, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<BB", VERSION, len(tag_b)))
        f.write(tag_b)
        f.write(struct.pack("<II", mat.shape[1], mat.shape[0]))
        f.write(mat.tobytes())
    sidecar_path(p).write_text(json.dumps(metadata, sort_keys=True, indent=0) + "\n")


def load_feature_store(path):
    """Read (tag, float32 matrix, metadata list) back from disk."""
    p = Path(path)
    raw = p.read_bytes()
    if raw[:4] != MAGIC:
        raise DataError(f"{p} is not a feature store (bad magic)")
    version, tag_len = struct.unpack_from("<BB", raw, 4)
    if version != VERSION:
        raise DataError(f"unsupported feature store version {version}")
    off = 6
    tag = raw[off:off + tag_len].decode("ascii")
    off += tag_len
    dim, count = struct.unpack_from("<II", raw, off)
    off += 8
    expect = count * dim * 4
    body = raw[off:off + expect]
    if len(body) != expect:
        raise DataError(f"{p} truncated: expected {expect} bytes of data, got {len(body)}")
    mat = np.frombuffer(body, dtype="<f4").reshape(count, dim).copy()
    meta_file = sidecar_path(p)
    metadata = json.loads(meta_file.read_text()) if meta_file.exists() else None
    if metadata is not None and len(metadata) != count:
        raise DataError(f"sidecar rows ({len(metadata)}) != matrix rows ({count})")
    return tag, mat, metadata
