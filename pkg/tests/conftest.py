import numpy as np
import pytest

from spoofcal.store import EmbeddingDataset, manifest_path_for, write_embeddings
from spoofcal.synthetic import gaussian_pair


@pytest.fixture(scope="session")
def synthetic_manifests(tmp_path_factory):
    """Small train/test EMB1 fixtures with manifest sidecars."""
    root = tmp_path_factory.mktemp("data")
    train, test = gaussian_pair(n_train=120, n_test=80, dim=4, separation=3.0, seed=7)
    write_embeddings(train, root / "train.emb1")
    write_embeddings(test, root / "test.emb1")
    return {
        "train": str(manifest_path_for(root / "train.emb1")),
        "test": str(manifest_path_for(root / "test.emb1")),
        "train_emb": str(root / "train.emb1"),
        "test_emb": str(root / "test.emb1"),
    }


@pytest.fixture(scope="session")
def single_class_manifest(tmp_path_factory):
    root = tmp_path_factory.mktemp("oneclass")
    rng = np.random.default_rng(0)
    ds = EmbeddingDataset(
        ids=tuple(f"s{i}" for i in range(10)),
        features=rng.normal(size=(10, 4)).astype(np.float32),
        labels=np.ones(10, dtype=np.int64),
        source="oneclass",
    )
    write_embeddings(ds, root / "one.emb1")
    return str(manifest_path_for(root / "one.emb1"))
