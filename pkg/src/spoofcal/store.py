"""Embedding exchange format (EMB1), dataset manifests, merging, subsampling.

EMB1 layout, little-endian: magic ``EMB1`` (4 bytes), u32 version (= 1),
u32 N, u32 D, u8 element-type code (0 = IEEE-754 float32), then N*D float32
values row-major.  The binary file is a pure numeric container; sample ids,
labels, and provenance live in a JSON manifest beside it.
"""

from __future__ import annotations

import json
import os
import struct
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    BadMagicError,
    DataError,
    FormatError,
    NonFinitePayloadError,
    PayloadSizeError,
    UnknownDtypeError,
    UnsupportedVersionError,
    ZeroShapeError,
)

MAGIC = b"EMB1"
VERSION = 1
DTYPE_FLOAT32 = 0
HEADER = struct.Struct("<4sIIIB")  # magic, version, n, d, dtype code

LABEL_NAMES = ("bonafide", "spoof")  # index == numeric label

MANIFEST_SUFFIX = ".manifest.json"


def atomic_write_bytes(path: str | Path, data: bytes) -> None:
    """Write via a temp file in the same directory, then rename over target."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=path.name + ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path: str | Path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


@dataclass(frozen=True)
class EmbeddingDataset:
    """N utterance-level embedding vectors with ids and binary labels.

    Features are held as float32, the exchange precision, so disk round trips
    are bit-exact.  Labels: 0 = bonafide, 1 = spoof.
    """

    ids: tuple[str, ...]
    features: np.ndarray
    labels: np.ndarray
    source: str = "unknown"

    def __post_init__(self) -> None:
        ids = tuple(str(i) for i in self.ids)
        feats = np.ascontiguousarray(np.asarray(self.features, dtype=np.float32))
        labels = np.asarray(self.labels, dtype=np.int64)
        if feats.ndim != 2:
            raise DataError(f"features must be 2-D, got shape {feats.shape}")
        n, d = feats.shape
        if n < 1 or d < 1:
            raise DataError(f"need at least one row and one column, got {n}x{d}")
        if len(ids) != n or labels.shape != (n,):
            raise DataError(
                f"length mismatch: {len(ids)} ids, {n} feature rows, {labels.shape[0]} labels"
            )
        if not np.all(np.isfinite(feats)):
            raise DataError("features contain NaN or infinite values")
        if not np.all((labels == 0) | (labels == 1)):
            raise DataError("labels must be 0 (bonafide) or 1 (spoof)")
        if len(set(ids)) != n:
            raise DataError("sample ids must be unique within a dataset")
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    @property
    def n_spoof(self) -> int:
        return int(np.sum(self.labels == 1))

    @property
    def n_bonafide(self) -> int:
        return int(np.sum(self.labels == 0))

    def take(self, indices: np.ndarray) -> "EmbeddingDataset":
        """Row subset in the given index order."""
        idx = np.asarray(indices, dtype=np.int64)
        return EmbeddingDataset(
            ids=tuple(self.ids[i] for i in idx),
            features=self.features[idx],
            labels=self.labels[idx],
            source=self.source,
        )


@dataclass(frozen=True)
class ManifestEntry:
    id: str
    embedding_file: str
    row_index: int
    label: str
    source: str

    def __post_init__(self) -> None:
        if self.label not in LABEL_NAMES:
            raise DataError(f"label must be one of {LABEL_NAMES}, got {self.label!r}")
        if self.row_index < 0:
            raise DataError(f"row_index must be non-negative, got {self.row_index}")


@dataclass(frozen=True)
class DatasetManifest:
    entries: tuple[ManifestEntry, ...]

    def __post_init__(self) -> None:
        if not self.entries:
            raise DataError("manifest has no entries")
        ids = [e.id for e in self.entries]
        if len(set(ids)) != len(ids):
            raise DataError("manifest ids must be unique")


def write_matrix(path: str | Path, matrix: np.ndarray) -> None:
    """Write a bare EMB1 file (header + float32 payload, no manifest)."""
    arr = np.ascontiguousarray(np.asarray(matrix, dtype=np.float32))
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DataError(f"matrix must be 2-D and non-empty, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DataError("refusing to write non-finite values")
    n, d = arr.shape
    header = HEADER.pack(MAGIC, VERSION, n, d, DTYPE_FLOAT32)
    atomic_write_bytes(path, header + arr.astype("<f4").tobytes(order="C"))


def read_matrix(path: str | Path) -> np.ndarray:
    """Read and validate a bare EMB1 file; returns an (N, D) float32 array."""
    data = Path(path).read_bytes()
    if len(data) < 4 or data[:4] != MAGIC:
        raise BadMagicError(f"{path}: not an EMB1 file")
    if len(data) < HEADER.size:
        raise PayloadSizeError(f"{path}: header truncated at {len(data)} bytes")
    _, version, n, d, dtype_code = HEADER.unpack_from(data)
    if version != VERSION:
        raise UnsupportedVersionError(f"{path}: version {version}, expected {VERSION}")
    if n == 0 or d == 0:
        raise ZeroShapeError(f"{path}: header declares {n}x{d}")
    if dtype_code != DTYPE_FLOAT32:
        raise UnknownDtypeError(f"{path}: unknown element-type code {dtype_code}")
    expected = HEADER.size + 4 * n * d
    if len(data) != expected:
        raise PayloadSizeError(f"{path}: expected {expected} bytes, found {len(data)}")
    arr = np.frombuffer(data, dtype="<f4", offset=HEADER.size).reshape(n, d).copy()
    if not np.all(np.isfinite(arr)):
        raise NonFinitePayloadError(f"{path}: payload contains NaN or infinite values")
    return arr


def manifest_path_for(embedding_path: str | Path) -> Path:
    return Path(str(embedding_path) + MANIFEST_SUFFIX)


def manifest_to_dict(manifest: DatasetManifest) -> dict:
    return {
        "entries": [
            {
                "id": e.id,
                "embedding_file": e.embedding_file,
                "row_index": e.row_index,
                "label": e.label,
                "source": e.source,
            }
            for e in manifest.entries
        ]
    }


def manifest_from_dict(payload: dict) -> DatasetManifest:
    if not isinstance(payload, dict) or "entries" not in payload:
        raise FormatError("manifest JSON must be an object with an 'entries' list")
    raw = payload["entries"]
    if not isinstance(raw, list):
        raise FormatError("manifest 'entries' must be a list")
    entries = []
    for i, item in enumerate(raw):
        if not isinstance(item, dict):
            raise FormatError(f"manifest entry {i} is not an object")
        try:
            entries.append(
                ManifestEntry(
                    id=str(item["id"]),
                    embedding_file=str(item["embedding_file"]),
                    row_index=int(item["row_index"]),
                    label=str(item["label"]),
                    source=str(item.get("source", "unknown")),
                )
            )
        except KeyError as exc:
            raise FormatError(f"manifest entry {i} lacks field {exc}") from None
    return DatasetManifest(entries=tuple(entries))


def write_manifest(manifest: DatasetManifest, path: str | Path) -> None:
    atomic_write_text(path, json.dumps(manifest_to_dict(manifest), indent=2, sort_keys=True) + "\n")


def load_manifest(path: str | Path) -> DatasetManifest:
    try:
        payload = json.loads(Path(path).read_text("utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from None
    return manifest_from_dict(payload)


def write_embeddings(dataset: EmbeddingDataset, destination: str | Path) -> None:
    """Write dataset to EMB1 plus a ``<destination>.manifest.json`` sidecar."""
    destination = Path(destination)
    write_matrix(destination, dataset.features)
    entries = tuple(
        ManifestEntry(
            id=dataset.ids[i],
            embedding_file=destination.name,
            row_index=i,
            label=LABEL_NAMES[int(dataset.labels[i])],
            source=dataset.source,
        )
        for i in range(len(dataset))
    )
    write_manifest(DatasetManifest(entries=entries), manifest_path_for(destination))


def read_embeddings(source: str | Path) -> EmbeddingDataset:
    """Inverse of write_embeddings; requires the manifest sidecar."""
    sidecar = manifest_path_for(source)
    if not sidecar.exists():
        raise DataError(f"{source}: no manifest sidecar at {sidecar}")
    return load_dataset(sidecar)


def load_dataset(manifest_path: str | Path) -> EmbeddingDataset:
    """Assemble a dataset from a manifest, rows in manifest entry order."""
    manifest_path = Path(manifest_path)
    manifest = load_manifest(manifest_path)
    base = manifest_path.parent
    matrices: dict[str, np.ndarray] = {}
    for entry in manifest.entries:
        if entry.embedding_file not in matrices:
            matrices[entry.embedding_file] = read_matrix(base / entry.embedding_file)
    dims = {m.shape[1] for m in matrices.values()}
    if len(dims) != 1:
        raise DataError(f"{manifest_path}: referenced files disagree on dimension: {sorted(dims)}")
    d = dims.pop()
    n = len(manifest.entries)
    features = np.empty((n, d), dtype=np.float32)
    labels = np.empty(n, dtype=np.int64)
    ids = []
    for i, entry in enumerate(manifest.entries):
        mat = matrices[entry.embedding_file]
        if entry.row_index >= mat.shape[0]:
            raise DataError(
                f"{manifest_path}: entry {entry.id!r} wants row {entry.row_index} "
                f"of {entry.embedding_file} which has {mat.shape[0]} rows"
            )
        features[i] = mat[entry.row_index]
        labels[i] = LABEL_NAMES.index(entry.label)
        ids.append(entry.id)
    sources = _unique_in_order(e.source for e in manifest.entries)
    return EmbeddingDataset(
        ids=tuple(ids), features=features, labels=labels, source="+".join(sources)
    )


def merge(datasets: list[EmbeddingDataset]) -> EmbeddingDataset:
    """Concatenate datasets in input order.

    Ids colliding across inputs are disambiguated by prefixing the owning
    dataset's source name (``source:id``).
    """
    if not datasets:
        raise DataError("merge needs at least one dataset")
    dims = {ds.dim for ds in datasets}
    if len(dims) != 1:
        raise DataError(f"dimension mismatch across datasets: {sorted(dims)}")
    all_ids: list[str] = []
    owner_source: list[str] = []
    for ds in datasets:
        all_ids.extend(ds.ids)
        owner_source.extend([ds.source] * len(ds))
    counts: dict[str, int] = {}
    for sid in all_ids:
        counts[sid] = counts.get(sid, 0) + 1
    resolved = [
        f"{src}:{sid}" if counts[sid] > 1 else sid
        for sid, src in zip(all_ids, owner_source)
    ]
    if len(set(resolved)) != len(resolved):
        raise DataError("id collision not resolvable by source prefixing")
    features = np.concatenate([ds.features for ds in datasets], axis=0)
    labels = np.concatenate([ds.labels for ds in datasets])
    sources = _unique_in_order(ds.source for ds in datasets)
    return EmbeddingDataset(
        ids=tuple(resolved), features=features, labels=labels, source="+".join(sources)
    )


def subsample(dataset: EmbeddingDataset, n: int, seed: int) -> EmbeddingDataset:
    """Draw n rows without replacement, stratified by label.

    Per-class counts follow largest-remainder rounding of the exact
    proportional targets, so each class is within one sample of its share.
    Selected row indices are sorted ascending, so n == N reproduces the
    dataset unchanged for any seed.
    """
    total = len(dataset)
    if not 1 <= n <= total:
        raise DataError(f"n must be in [1, {total}], got {n}")
    labels = dataset.labels
    class_idx = [np.flatnonzero(labels == c) for c in (0, 1)]
    class_n = [len(ix) for ix in class_idx]
    floors = [(n * cn) // total for cn in class_n]
    remainders = [(n * cn) % total for cn in class_n]
    leftover = n - sum(floors)
    order = sorted(range(2), key=lambda c: (-remainders[c], c))
    counts = list(floors)
    for c in order[:leftover]:
        counts[c] += 1
    if all(cn > 0 for cn in class_n) and any(k == 0 for k in counts):
        raise DataError(
            f"n={n} leaves a class empty (allocation bonafide={counts[0]}, spoof={counts[1]})"
        )
    rng = np.random.default_rng(seed)
    picked = [
        rng.choice(class_idx[c], size=counts[c], replace=False)
        for c in (0, 1)
        if counts[c] > 0
    ]
    indices = np.sort(np.concatenate(picked))
    return dataset.take(indices)


def _unique_in_order(items) -> list[str]:
    seen: dict[str, None] = {}
    for item in items:
        seen.setdefault(item, None)
    return list(seen)
