"""Generate a synthetic imbalanced dataset: two Gaussian blobs, rare positives.

Negative rows are drawn around the origin, positive rows around shift * ones.
Useful for exercising the oversampling pipeline without real embeddings.
"""

import argparse
from pathlib import Path

import numpy as np

from vecbalance import EmbeddedDataset, save_dataset


def build(rows: int, dim: int, positives: int, shift: float, seed: int) -> EmbeddedDataset:
    if not 0 <= positives <= rows:
        raise SystemExit("positives must lie in [0, rows]")
    rng = np.random.Generator(np.random.PCG64(seed))
    vectors = rng.normal(size=(rows, dim)).astype(np.float32)
    vectors[:positives] += np.float32(shift)
    labels = np.zeros(rows, dtype=np.uint8)
    labels[:positives] = 1
    return EmbeddedDataset(dim=dim, vectors=vectors, labels=labels)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rows", type=int, default=2000)
    parser.add_argument("--dim", type=int, default=32)
    parser.add_argument("--positives", type=int, default=20)
    parser.add_argument("--shift", type=float, default=3.0)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--out", type=Path, required=True)
    parser.add_argument("--format", choices=("binary", "csv"), default="binary")
    args = parser.parse_args()

    ds = build(args.rows, args.dim, args.positives, args.shift, args.seed)
    save_dataset(ds, args.out, format=args.format)
    counts = ds.class_counts()
    print(f"wrote {args.out}: {len(ds)} rows, dim={ds.dim}, "
          f"label0={counts.nsbr} label1={counts.sbr}")


if __name__ == "__main__":
    main()
