"""Minority-class oversampling: decoder sampling and SMOTE interpolation."""

from __future__ import annotations

import warnings

import numpy as np

from .cvae import CvaeModel, decode, model_hash
from .vecdata import EmbeddedDataset, to_condition


def required_count(dataset: EmbeddedDataset) -> int:
    """Rows needed to balance the two classes exactly."""
    counts = dataset.class_counts()
    return abs(counts.nsbr - counts.sbr)


def minority_label(dataset: EmbeddedDataset) -> int:
    """The rarer label; 0 on a tie (the required count is then zero anyway)."""
    counts = dataset.class_counts()
    return 1 if counts.sbr < counts.nsbr else 0


def generate(model: CvaeModel, count: int, label: int, seed: int) -> EmbeddedDataset:
    """Decode `count` latent draws z ~ N(0, I) under the given class condition."""
    if count < 0:
        raise ValueError("count must be non-negative")
    rng = np.random.Generator(np.random.PCG64(seed))
    z = rng.standard_normal((count, model.latent_dim)).astype(np.float32)
    c = np.tile(to_condition(label), (count, 1))
    if count == 0:
        vectors = np.zeros((0, model.data_dim), dtype=np.float32)
    else:
        vectors = decode(model, z, c)
    return EmbeddedDataset(
        dim=model.data_dim,
        vectors=vectors,
        labels=np.full(count, label, dtype=np.uint8),
        source_tag=f"synthesized:{model_hash(model)}:{seed}",
    )


def augment_to_balance(dataset: EmbeddedDataset, model: CvaeModel, seed: int) -> EmbeddedDataset:
    """Append decoder-sampled minority rows until both classes are equal.

    Original rows keep their order and come first; synthetic rows follow.
    """
    if model.data_dim != dataset.dim:
        raise ValueError(
            f"model expects dimension {model.data_dim}, dataset has {dataset.dim}"
        )
    count = required_count(dataset)
    synth = generate(model, count, minority_label(dataset), seed)
    return EmbeddedDataset(
        dim=dataset.dim,
        vectors=np.concatenate([dataset.vectors, synth.vectors]),
        labels=np.concatenate([dataset.labels, synth.labels]),
        source_tag=dataset.source_tag,
    )


def smote_oversample(
    dataset: EmbeddedDataset,
    count: int | None = None,
    k: int = 5,
    seed: int = 0,
    return_parents: bool = False,
):
    """Interpolated minority rows: x + lambda * (neighbor - x), lambda ~ U[0, 1).

    For each new row a minority row is drawn uniformly, then one of its k
    nearest minority neighbors (Euclidean). k is clamped to the available
    neighbor count with a warning. With return_parents=True also returns the
    (base, neighbor) dataset row indices used for each synthetic row.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if count is None:
        count = required_count(dataset)
    if count < 0:
        raise ValueError("count must be non-negative")
    label = minority_label(dataset)
    minority_idx = np.flatnonzero(dataset.labels == label)
    if len(minority_idx) < 2 and count > 0:
        raise ValueError(
            f"need at least 2 rows of label {label} to interpolate, have {len(minority_idx)}"
        )
    k_eff = min(k, len(minority_idx) - 1) if len(minority_idx) > 1 else 0
    if 0 < k_eff < k:
        warnings.warn(
            f"k={k} exceeds available minority neighbors; using k={k_eff}",
            stacklevel=2,
        )

    rng = np.random.Generator(np.random.PCG64(seed))
    vectors = np.zeros((count, dataset.dim), dtype=np.float32)
    parents: list[tuple[int, int]] = []
    if count > 0:
        minority = dataset.vectors[minority_idx].astype(np.float64)
        diffs = minority[:, None, :] - minority[None, :, :]
        dists = np.sqrt(np.sum(np.square(diffs), axis=2))
        np.fill_diagonal(dists, np.inf)
        neighbor_ranks = np.argsort(dists, axis=1, kind="stable")[:, :k_eff]
        for row in range(count):
            i = int(rng.integers(len(minority_idx)))
            j = int(neighbor_ranks[i, int(rng.integers(k_eff))])
            lam = rng.random()
            vectors[row] = (minority[i] + lam * (minority[j] - minority[i])).astype(
                np.float32
            )
            parents.append((int(minority_idx[i]), int(minority_idx[j])))
    synth = EmbeddedDataset(
        dim=dataset.dim,
        vectors=vectors,
        labels=np.full(count, label, dtype=np.uint8),
        source_tag=f"smote:{seed}",
    )
    if return_parents:
        return synth, parents
    return synth
