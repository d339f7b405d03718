"""Byte-level checks of the EMB1 writer and its manifest sidecar."""

import json
import struct

import numpy as np
import pytest

from embext import manifest_entry, manifest_path_for, write_manifest, write_matrix

HEADER = struct.Struct("<4sIIIB")


def read_emb1_bytes(path):
    raw = path.read_bytes()
    magic, version, n, d, dtype = HEADER.unpack(raw[: HEADER.size])
    assert magic == b"EMB1"
    assert version == 1
    assert dtype == 0
    matrix = np.frombuffer(raw[HEADER.size :], dtype="<f4").reshape(n, d)
    return matrix, len(raw)


def test_header_and_payload_layout(tmp_path):
    matrix = np.array([[1.5, -2.0, 0.0], [3.25, 4.0, -0.125]], dtype=np.float32)
    out = tmp_path / "two.emb1"
    write_matrix(out, matrix)
    read_back, size = read_emb1_bytes(out)
    assert size == HEADER.size + 2 * 3 * 4
    assert np.array_equal(read_back, matrix)
    # payload is exactly the row-major float32 bytes
    assert out.read_bytes()[HEADER.size :] == matrix.tobytes()


def test_writer_refuses_non_finite(tmp_path):
    with pytest.raises(ValueError):
        write_matrix(tmp_path / "x.emb1", np.array([[np.nan]], dtype=np.float32))
    with pytest.raises(ValueError):
        write_matrix(tmp_path / "x.emb1", np.array([[np.inf]], dtype=np.float32))
    assert not (tmp_path / "x.emb1").exists()


def test_writer_refuses_empty_shapes(tmp_path):
    with pytest.raises(ValueError):
        write_matrix(tmp_path / "x.emb1", np.zeros((0, 3), dtype=np.float32))
    with pytest.raises(ValueError):
        write_matrix(tmp_path / "x.emb1", np.zeros((3, 0), dtype=np.float32))


def test_manifest_schema_and_sidecar_name(tmp_path):
    out = tmp_path / "set.emb1"
    entries = [
        manifest_entry("u1", "set.emb1", 0, "bonafide", "demo:last_hidden"),
        manifest_entry("u2", "set.emb1", 1, "spoof", "demo:last_hidden"),
    ]
    sidecar = manifest_path_for(out)
    assert sidecar.name == "set.emb1.manifest.json"
    write_manifest(sidecar, entries)
    payload = json.loads(sidecar.read_text())
    assert list(payload) == ["entries"]
    assert payload["entries"][0] == {
        "id": "u1",
        "embedding_file": "set.emb1",
        "row_index": 0,
        "label": "bonafide",
        "source": "demo:last_hidden",
    }


def test_manifest_rejects_bad_label_and_duplicate_ids(tmp_path):
    with pytest.raises(ValueError):
        manifest_entry("u1", "f", 0, "genuine", "s")
    entries = [
        manifest_entry("u1", "f", 0, "spoof", "s"),
        manifest_entry("u1", "f", 1, "spoof", "s"),
    ]
    with pytest.raises(ValueError):
        write_manifest(tmp_path / "m.json", entries)
