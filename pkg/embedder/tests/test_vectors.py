"""Cross-component checks: what this package writes, the pipeline reads."""

import numpy as np
import pytest
from vecbalance import load_dataset, save_dataset

from embedder import VectorSet, write_vectors


def sample_set(rows=7, dim=5, seed=0):
    rng = np.random.Generator(np.random.PCG64(seed))
    vectors = rng.normal(size=(rows, dim)).astype(np.float32)
    labels = (rng.uniform(size=rows) < 0.4).astype(np.uint8)
    return VectorSet(dim=dim, vectors=vectors, labels=labels)


def test_binary_cross_read_bitwise(tmp_path):
    vs = sample_set()
    path = tmp_path / "v.sedv"
    write_vectors(vs, path)
    loaded = load_dataset(path)
    assert loaded.dim == vs.dim
    assert np.array_equal(loaded.labels, vs.labels)
    assert np.array_equal(loaded.vectors, vs.vectors)


def test_binary_bytes_match_pipeline_writer(tmp_path):
    vs = sample_set(seed=1)
    ours = tmp_path / "ours.sedv"
    theirs = tmp_path / "theirs.sedv"
    write_vectors(vs, ours)
    save_dataset(load_dataset(ours), theirs)
    assert ours.read_bytes() == theirs.read_bytes()


def test_csv_cross_read(tmp_path):
    vs = sample_set(seed=2)
    path = tmp_path / "v.csv"
    write_vectors(vs, path, format="csv")
    loaded = load_dataset(path)
    assert np.array_equal(loaded.labels, vs.labels)
    assert np.allclose(loaded.vectors, vs.vectors, atol=1e-6)
    # %.9g carries enough digits that the round trip is in fact exact
    assert np.array_equal(loaded.vectors, vs.vectors)


def test_unknown_format_rejected(tmp_path):
    with pytest.raises(ValueError, match="format"):
        write_vectors(sample_set(), tmp_path / "v", format="parquet")


def test_unwritable_path_errors(tmp_path):
    with pytest.raises(OSError):
        write_vectors(sample_set(), tmp_path / "no" / "dir" / "v.sedv")
