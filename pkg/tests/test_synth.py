"""Synthesis budget, decoder sampling, balancing, SMOTE baseline."""

import warnings

import numpy as np
import pytest

from fixture_data import gaussian_pair
from vecbalance.cvae import CvaeConfig, train_cvae
from vecbalance.synth import (
    augment_to_balance,
    generate,
    minority_label,
    required_count,
    smote_oversample,
)
from vecbalance.vecdata import EmbeddedDataset


def tiny_model(ds, seed=0, epochs=1):
    cfg = CvaeConfig(latent_dim=2, hidden=(6,), epochs=epochs, batch_size=32, seed=seed)
    return train_cvae(ds, cfg)


def labeled(labels, dim=3, seed=0):
    labels = np.asarray(labels, dtype=np.uint8)
    rng = np.random.Generator(np.random.PCG64(seed))
    vectors = rng.normal(size=(len(labels), dim)).astype(np.float32)
    return EmbeddedDataset(dim=dim, vectors=vectors, labels=labels)


# ----------------------------------------------------------- required_count


def test_required_count_basic():
    assert required_count(labeled([0, 0, 0, 1])) == 2
    assert required_count(labeled([0, 0, 1, 1])) == 0
    assert required_count(labeled([1, 1, 1, 0])) == 2
    assert required_count(labeled([0] * 912 + [1] * 88)) == 824


def test_minority_label():
    assert minority_label(labeled([0, 0, 1])) == 1
    assert minority_label(labeled([1, 1, 0])) == 0
    assert minority_label(labeled([0, 1])) == 0  # tie: nothing to generate


# ----------------------------------------------------------------- generate


def test_generate_count_label_and_tag():
    ds = gaussian_pair(40, 4, 10, seed=1)
    model = tiny_model(ds)
    synth = generate(model, 7, 1, seed=3)
    assert len(synth) == 7
    assert synth.dim == 4
    assert np.all(synth.labels == 1)
    parts = synth.source_tag.split(":")
    assert parts[0] == "synthesized"
    assert len(parts[1]) == 12
    assert parts[2] == "3"


def test_generate_deterministic():
    ds = gaussian_pair(40, 4, 10, seed=2)
    model = tiny_model(ds)
    a = generate(model, 11, 1, seed=5)
    b = generate(model, 11, 1, seed=5)
    assert a.vectors.tobytes() == b.vectors.tobytes()
    c = generate(model, 11, 1, seed=6)
    assert a.vectors.tobytes() != c.vectors.tobytes()


def test_generate_zero_and_negative():
    ds = gaussian_pair(30, 4, 10, seed=3)
    model = tiny_model(ds)
    empty = generate(model, 0, 0, seed=1)
    assert len(empty) == 0 and empty.dim == 4
    with pytest.raises(ValueError):
        generate(model, -1, 1, seed=1)


def test_generate_conditions_differ_by_label():
    ds = gaussian_pair(60, 4, 20, seed=4)
    model = tiny_model(ds, epochs=5)
    pos = generate(model, 5, 1, seed=7)
    neg = generate(model, 5, 0, seed=7)
    # same latent draws, different condition -> different decoded rows
    assert pos.vectors.tobytes() != neg.vectors.tobytes()


# -------------------------------------------------------- augment_to_balance


def test_augment_balances_and_preserves_originals():
    ds = gaussian_pair(50, 4, 10, seed=5)
    model = tiny_model(ds)
    combined = augment_to_balance(ds, model, seed=9)
    counts = combined.class_counts()
    assert counts.nsbr == counts.sbr
    assert len(combined) == 80
    assert combined.vectors[:50].tobytes() == ds.vectors.tobytes()
    assert np.array_equal(combined.labels[:50], ds.labels)
    assert np.all(combined.labels[50:] == 1)


def test_augment_balanced_input_is_noop_sized():
    ds = labeled([0, 0, 1, 1], dim=4, seed=6)
    model = tiny_model(gaussian_pair(30, 4, 10, seed=6))
    combined = augment_to_balance(ds, model, seed=1)
    assert len(combined) == 4


def test_augment_dim_mismatch():
    ds = labeled([0, 0, 1], dim=5)
    model = tiny_model(gaussian_pair(30, 4, 10, seed=7))
    with pytest.raises(ValueError):
        augment_to_balance(ds, model, seed=1)


# -------------------------------------------------------------------- smote


def test_smote_rows_lie_between_parents():
    ds = gaussian_pair(60, 5, 20, seed=8)
    synth, parents = smote_oversample(ds, count=25, k=3, seed=2, return_parents=True)
    assert len(synth) == 25 and len(parents) == 25
    for row, (i, j) in zip(synth.vectors.astype(np.float64), parents):
        p1 = ds.vectors[i].astype(np.float64)
        p2 = ds.vectors[j].astype(np.float64)
        assert ds.labels[i] == 1 and ds.labels[j] == 1
        seg = p2 - p1
        lam = float(np.dot(row - p1, seg) / np.dot(seg, seg))
        assert -1e-6 <= lam <= 1.0 + 1e-6
        assert np.allclose(row, p1 + lam * seg, atol=1e-5)


def test_smote_default_count_balances():
    ds = gaussian_pair(40, 3, 8, seed=9)
    synth = smote_oversample(ds, seed=3)
    assert len(synth) == required_count(ds) == 24
    assert np.all(synth.labels == 1)
    assert synth.source_tag == "smote:3"


def test_smote_clamps_k_with_warning():
    ds = labeled([0] * 10 + [1] * 3, dim=2, seed=10)
    with pytest.warns(UserWarning, match="k=2"):
        synth = smote_oversample(ds, count=5, k=5, seed=1)
    assert len(synth) == 5


def test_smote_needs_two_minority_rows():
    ds = labeled([0] * 5 + [1], dim=2, seed=11)
    with pytest.raises(ValueError):
        smote_oversample(ds, count=2, seed=1)


def test_smote_deterministic():
    ds = gaussian_pair(50, 4, 15, seed=12)
    a = smote_oversample(ds, count=10, seed=4)
    b = smote_oversample(ds, count=10, seed=4)
    assert a.vectors.tobytes() == b.vectors.tobytes()


def test_smote_validation():
    ds = gaussian_pair(30, 3, 10, seed=13)
    with pytest.raises(ValueError):
        smote_oversample(ds, count=-1, seed=0)
    with pytest.raises(ValueError):
        smote_oversample(ds, count=3, k=0, seed=0)
