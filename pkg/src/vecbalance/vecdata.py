"""Labeled vector datasets: in-memory model, file formats, folds, duplication checks.

A dataset is an (n, dim) float32 matrix plus one binary label per row
(0 = majority/negative, 1 = minority/positive by convention).
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

MAGIC = b"SEDV"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIII")  # magic, version, rows, dim


class VectorDataError(Exception):
    """Base class for dataset file and shape problems."""


class HeaderError(VectorDataError):
    """File header is missing, malformed, or the byte count is wrong."""


class DimensionError(VectorDataError):
    """Row lengths or dataset dimensions disagree."""


class LabelError(VectorDataError):
    """A label is outside {0, 1}."""


class NonFiniteError(VectorDataError):
    """A vector contains NaN or infinity."""


class ClassCounts(NamedTuple):
    nsbr: int
    sbr: int


@dataclass(frozen=True)
class EmbeddedDataset:
    """Immutable labeled vector dataset.

    vectors: (n, dim) float32, all finite.
    labels: (n,) uint8 in {0, 1}, same length as vectors.
    """

    dim: int
    vectors: np.ndarray
    labels: np.ndarray
    source_tag: str = ""

    def __post_init__(self):
        vecs = np.ascontiguousarray(self.vectors, dtype=np.float32)
        labs = np.asarray(self.labels)
        if vecs.ndim != 2 or vecs.shape[1] != self.dim:
            raise DimensionError(
                f"expected vectors of shape (n, {self.dim}), got {vecs.shape}"
            )
        if labs.ndim != 1 or labs.shape[0] != vecs.shape[0]:
            raise DimensionError(
                f"{vecs.shape[0]} rows but {labs.shape[0]} labels"
            )
        bad = np.flatnonzero(~np.isin(labs, (0, 1)))
        if bad.size:
            raise LabelError(f"label outside {{0,1}} at row {bad[0]}")
        finite = np.isfinite(vecs).all(axis=1)
        if not finite.all():
            raise NonFiniteError(
                f"non-finite value in row {np.flatnonzero(~finite)[0]}"
            )
        labs = labs.astype(np.uint8)
        vecs.setflags(write=False)
        labs.setflags(write=False)
        object.__setattr__(self, "vectors", vecs)
        object.__setattr__(self, "labels", labs)

    def __len__(self) -> int:
        return self.vectors.shape[0]

    def class_counts(self) -> ClassCounts:
        sbr = int(np.count_nonzero(self.labels))
        return ClassCounts(nsbr=len(self) - sbr, sbr=sbr)


def to_condition(label: int) -> np.ndarray:
    """One-hot class indicator: 0 -> [1,0], 1 -> [0,1]."""
    if label not in (0, 1):
        raise LabelError(f"label outside {{0,1}}: {label!r}")
    out = np.zeros(2, dtype=np.float32)
    out[int(label)] = 1.0
    return out


def condition_matrix(labels) -> np.ndarray:
    """Stack of condition vectors, one row per label."""
    labels = np.asarray(labels)
    out = np.zeros((labels.shape[0], 2), dtype=np.float32)
    out[np.arange(labels.shape[0]), labels.astype(np.intp)] = 1.0
    return out


def save_dataset(ds: EmbeddedDataset, path, format: str = "binary") -> None:
    if format == "binary":
        _save_binary(ds, path)
    elif format == "csv":
        _save_csv(ds, path)
    else:
        raise ValueError(f"unknown format {format!r}")


def load_dataset(path, format: str | None = None) -> EmbeddedDataset:
    """Read a dataset file. format=None sniffs binary vs csv from the magic bytes."""
    if format is None:
        with open(path, "rb") as f:
            format = "binary" if f.read(4) == MAGIC else "csv"
    if format == "binary":
        return _load_binary(path)
    if format == "csv":
        return _load_csv(path)
    raise ValueError(f"unknown format {format!r}")


def _save_binary(ds: EmbeddedDataset, path) -> None:
    with open(path, "wb") as f:
        f.write(_HEADER.pack(MAGIC, FORMAT_VERSION, len(ds), ds.dim))
        f.write(ds.vectors.astype("<f4", copy=False).tobytes())
        f.write(ds.labels.tobytes())


def _load_binary(path) -> EmbeddedDataset:
    with open(path, "rb") as f:
        raw = f.read()
    if len(raw) < _HEADER.size:
        raise HeaderError(f"{path}: file shorter than header")
    magic, version, rows, dim = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise HeaderError(f"{path}: bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise HeaderError(f"{path}: unsupported version {version}")
    expected = _HEADER.size + rows * dim * 4 + rows
    if len(raw) != expected:
        raise HeaderError(
            f"{path}: expected {expected} bytes for {rows}x{dim}, got {len(raw)}"
        )
    off = _HEADER.size
    vecs = np.frombuffer(raw, dtype="<f4", count=rows * dim, offset=off)
    labs = np.frombuffer(raw, dtype=np.uint8, count=rows, offset=off + rows * dim * 4)
    return EmbeddedDataset(
        dim=dim,
        vectors=vecs.reshape(rows, dim),
        labels=labs,
        source_tag=str(path),
    )


def _save_csv(ds: EmbeddedDataset, path) -> None:
    with open(path, "w", newline="") as f:
        f.write("id,label," + ",".join(f"d{i}" for i in range(ds.dim)) + "\n")
        for i in range(len(ds)):
            row = ",".join("%.9g" % v for v in ds.vectors[i])
            f.write(f"{i},{ds.labels[i]},{row}\n")


def _load_csv(path) -> EmbeddedDataset:
    with open(path, newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise HeaderError(f"{path}: empty file") from None
        if len(header) < 3 or header[0] != "id" or header[1] != "label":
            raise HeaderError(f"{path}: expected header id,label,d0,... got {header[:3]}")
        dim = len(header) - 2
        if header[2:] != [f"d{i}" for i in range(dim)]:
            raise HeaderError(f"{path}: malformed dimension columns")
        vecs, labs = [], []
        for rownum, row in enumerate(reader):
            if len(row) != dim + 2:
                raise DimensionError(
                    f"{path}: row {rownum} has {len(row) - 2} values, expected {dim}"
                )
            if row[1] not in ("0", "1"):
                raise LabelError(f"{path}: row {rownum} label {row[1]!r} outside {{0,1}}")
            labs.append(int(row[1]))
            try:
                vecs.append([float(v) for v in row[2:]])
            except ValueError as e:
                raise VectorDataError(f"{path}: row {rownum}: {e}") from None
    arr = np.array(vecs, dtype=np.float32).reshape(len(labs), dim)
    finite = np.isfinite(arr).all(axis=1)
    if not finite.all():
        raise NonFiniteError(
            f"{path}: non-finite value in row {np.flatnonzero(~finite)[0]}"
        )
    return EmbeddedDataset(dim=dim, vectors=arr, labels=np.array(labs), source_tag=str(path))


@dataclass(frozen=True)
class FoldPlan:
    """Stratified partition of row indices into k disjoint test folds."""

    k: int
    assignments: np.ndarray = field(repr=False)

    def __post_init__(self):
        a = np.asarray(self.assignments, dtype=np.intp)
        a.setflags(write=False)
        object.__setattr__(self, "assignments", a)

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments != fold)


def stratified_kfold(ds: EmbeddedDataset, k: int, seed: int) -> FoldPlan:
    """Deterministic stratified fold assignment.

    Shuffles each class's row indices with the seeded generator, then deals
    them round-robin into k folds, so per-class fold counts differ by at most 1.
    """
    n = len(ds)
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if k > n:
        raise ValueError(f"k={k} exceeds dataset size {n}")
    counts = ds.class_counts()
    if counts.nsbr == 0 or counts.sbr == 0:
        raise ValueError("stratified folding needs at least one row per class")
    rng = np.random.Generator(np.random.PCG64(seed))
    assignments = np.empty(n, dtype=np.intp)
    for label in (0, 1):
        idx = np.flatnonzero(ds.labels == label)
        perm = rng.permutation(idx)
        assignments[perm] = np.arange(perm.size) % k
    return FoldPlan(k=k, assignments=assignments)


def _exact_row_keys(vectors: np.ndarray) -> list[bytes]:
    # +0.0 canonicalizes -0.0 so byte keys agree with float equality
    canon = np.ascontiguousarray(vectors, dtype=np.float32) + 0.0
    return [canon[i].tobytes() for i in range(canon.shape[0])]


def dedup_count(
    original: EmbeddedDataset,
    synthesized: EmbeddedDataset,
    tolerance: float = 0.0,
) -> int:
    """Number of synthesized rows within Chebyshev `tolerance` of some original row.

    tolerance 0 means exact float equality.
    """
    if original.dim != synthesized.dim:
        raise DimensionError(
            f"dimension mismatch: {original.dim} vs {synthesized.dim}"
        )
    if tolerance < 0:
        raise ValueError("tolerance must be nonnegative")
    if len(synthesized) == 0 or len(original) == 0:
        return 0
    if tolerance == 0:
        keys = set(_exact_row_keys(original.vectors))
        return sum(1 for key in _exact_row_keys(synthesized.vectors) if key in keys)
    return _chebyshev_match_count(original.vectors, synthesized.vectors, tolerance)


def dedup_within(ds: EmbeddedDataset, tolerance: float = 0.0) -> int:
    """Number of rows within `tolerance` of an earlier row of the same dataset."""
    if tolerance < 0:
        raise ValueError("tolerance must be nonnegative")
    if tolerance == 0:
        seen: set[bytes] = set()
        count = 0
        for key in _exact_row_keys(ds.vectors):
            if key in seen:
                count += 1
            seen.add(key)
        return count
    count = 0
    vecs = np.asarray(ds.vectors, dtype=np.float64)
    for i in range(1, len(ds)):
        if np.max(np.abs(vecs[:i] - vecs[i]), axis=1).min() <= tolerance:
            count += 1
    return count


def _chebyshev_match_count(orig: np.ndarray, synth: np.ndarray, tol: float) -> int:
    orig = np.asarray(orig, dtype=np.float64)
    synth = np.asarray(synth, dtype=np.float64)
    matched = np.zeros(synth.shape[0], dtype=bool)
    o_chunk = max(1, int(4e6 // max(1, synth.shape[1] * 64)))
    for start in range(0, orig.shape[0], o_chunk):
        block = orig[start : start + o_chunk]
        todo = np.flatnonzero(~matched)
        if todo.size == 0:
            break
        for s_start in range(0, todo.size, 64):
            rows = todo[s_start : s_start + 64]
            dist = np.abs(synth[rows, None, :] - block[None, :, :]).max(axis=2)
            matched[rows] |= (dist <= tol).any(axis=1)
    return int(np.count_nonzero(matched))
