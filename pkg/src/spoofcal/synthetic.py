"""Two-Gaussian synthetic embedding datasets for end-to-end checks.

Bonafide vectors draw from N(0, I) and spoof vectors from N(separation * 1, I),
i.e. every coordinate of the spoof mean sits `separation` pooled standard
deviations away from the bonafide mean.
"""

from __future__ import annotations

import numpy as np

from .store import EmbeddingDataset


def gaussian_split(
    n: int, dim: int, separation: float, rng: np.random.Generator, tag: str
) -> EmbeddingDataset:
    """One balanced split of n samples (n // 2 spoof)."""
    n_spoof = n // 2
    n_bona = n - n_spoof
    bona = rng.normal(0.0, 1.0, size=(n_bona, dim))
    spoof = rng.normal(separation, 1.0, size=(n_spoof, dim))
    features = np.vstack([bona, spoof])
    labels = np.concatenate([np.zeros(n_bona, dtype=np.int64), np.ones(n_spoof, dtype=np.int64)])
    order = rng.permutation(n)
    ids = tuple(f"{tag}-{i:06d}" for i in range(n))
    return EmbeddingDataset(
        ids=ids,
        features=features[order].astype(np.float32),
        labels=labels[order],
        source=f"synthetic-{tag}",
    )


def gaussian_pair(
    n_train: int = 2000,
    n_test: int = 2000,
    dim: int = 16,
    separation: float = 4.0,
    seed: int = 0,
) -> tuple[EmbeddingDataset, EmbeddingDataset]:
    """Train/test datasets from one seeded generator (train drawn first)."""
    rng = np.random.default_rng(seed)
    train = gaussian_split(n_train, dim, separation, rng, "train")
    test = gaussian_split(n_test, dim, separation, rng, "test")
    return train, test
