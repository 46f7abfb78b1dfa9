"""embed: turn a bug-report CSV into a vector file."""

import argparse
import sys
from pathlib import Path

from .encode import DEFAULT_CHECKPOINT, embed_reports
from .records import ReportSchemaError, ingest_csv
from .vectors import write_vectors


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="embed",
        description="Embed bug reports (id,summary,description,label CSV) "
        "into a vector file.",
    )
    parser.add_argument("--input", type=Path, required=True)
    parser.add_argument("--checkpoint", default=DEFAULT_CHECKPOINT)
    parser.add_argument("--out", type=Path, required=True)
    parser.add_argument("--format", choices=("binary", "csv"), default="binary")
    parser.add_argument("--batch", type=int, default=32)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    print(
        f"# config: command=embed input={args.input} "
        f"checkpoint={args.checkpoint} out={args.out} "
        f"format={args.format} batch={args.batch}"
    )
    try:
        records = ingest_csv(args.input)
        vectors = embed_reports(records, checkpoint=args.checkpoint,
                                batch_size=args.batch)
        write_vectors(vectors, args.out, format=args.format)
    except (ReportSchemaError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"embedded {len(vectors)} reports (dim {vectors.dim}) -> {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
