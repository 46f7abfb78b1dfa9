"""Synthetic datasets shared across the test modules."""

import numpy as np

from vecbalance import EmbeddedDataset


def gaussian_pair(n_rows: int, dim: int, n_positive: int, shift: float = 3.0,
                  seed: int = 7) -> EmbeddedDataset:
    """Two spherical unit Gaussians: label 0 at the origin, label 1 at shift*1."""
    rng = np.random.Generator(np.random.PCG64(seed))
    neg = rng.normal(size=(n_rows - n_positive, dim))
    pos = rng.normal(size=(n_positive, dim)) + shift
    vectors = np.concatenate([neg, pos]).astype(np.float32)
    labels = np.concatenate(
        [np.zeros(n_rows - n_positive, dtype=np.uint8), np.ones(n_positive, dtype=np.uint8)]
    )
    return EmbeddedDataset(dim=dim, vectors=vectors, labels=labels)
