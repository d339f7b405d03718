"""Writer for the EMB1 exchange format plus its JSON sidecar manifest.

Layout, little-endian throughout: magic `EMB1`, u32 version (1), u32 row
count, u32 column count, u8 dtype code (0 = IEEE-754 float32), then the
row-major float32 payload. The manifest is a JSON object with an `entries`
list of {id, embedding_file, row_index, label, source}; labels are exactly
`bonafide` or `spoof`.

Writer only. Consumers validate files with their own readers, so this module
shares no code with them; agreement is enforced by integration tests.
"""

import json
import os
import struct
import tempfile
from pathlib import Path

import numpy as np

MAGIC = b"EMB1"
VERSION = 1
DTYPE_FLOAT32 = 0
HEADER = struct.Struct("<4sIIIB")
LABELS = ("bonafide", "spoof")


def _atomic_write(path: Path, payload: bytes) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(payload)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def write_matrix(path, matrix: np.ndarray) -> None:
    """Write an N x D float32 matrix; refuses empty shapes and non-finite values."""
    matrix = np.ascontiguousarray(matrix, dtype=np.float32)
    if matrix.ndim != 2 or matrix.shape[0] < 1 or matrix.shape[1] < 1:
        raise ValueError(f"need a non-empty 2-D matrix, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise ValueError("matrix contains NaN or Inf")
    n, d = matrix.shape
    header = HEADER.pack(MAGIC, VERSION, n, d, DTYPE_FLOAT32)
    _atomic_write(Path(path), header + matrix.tobytes())


def manifest_entry(sample_id: str, embedding_file: str, row_index: int, label: str, source: str) -> dict:
    if label not in LABELS:
        raise ValueError(f"label must be one of {LABELS}, got {label!r}")
    if row_index < 0:
        raise ValueError(f"row_index must be non-negative, got {row_index}")
    return {
        "id": sample_id,
        "embedding_file": embedding_file,
        "row_index": int(row_index),
        "label": label,
        "source": source,
    }


def manifest_path_for(embedding_path) -> Path:
    return Path(str(embedding_path) + ".manifest.json")


def write_manifest(path, entries) -> None:
    entries = list(entries)
    ids = [e["id"] for e in entries]
    if len(set(ids)) != len(ids):
        raise ValueError("manifest ids must be unique")
    payload = json.dumps({"entries": entries}, indent=2, sort_keys=True) + "\n"
    _atomic_write(Path(path), payload.encode("utf-8"))
