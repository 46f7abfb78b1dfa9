"""Command-line driver: train a generator, synthesize rows, evaluate, dedup.

Exit codes are a stable contract: 0 success, 1 usage error, 2 data error
(unreadable/malformed files, dimension or label problems), 3 numerical
failure (diverged training). Every subcommand prints its fully resolved
configuration first so defaults are always visible in run logs.
"""

from __future__ import annotations

import argparse
import pathlib
import sys

from .cvae import CvaeConfig, ModelFileError, load_model, save_model, train_cvae
from .evaluation import report, run_cv
from .neuralnet import TrainingDivergedError
from .synth import generate, required_count
from .vecdata import VectorDataError, dedup_count, load_dataset, save_dataset


class UsageError(Exception):
    """Flag combinations argparse alone cannot reject."""


def _parse_hidden(text: str) -> tuple[int, ...]:
    try:
        dims = tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not dims:
        raise argparse.ArgumentTypeError("hidden layer list must not be empty")
    return dims


def _print_config(command: str, pairs: list[tuple[str, object]]) -> None:
    rendered = " ".join(f"{key}={value}" for key, value in pairs)
    print(f"# config: command={command} {rendered}")


def _add_cvae_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--latent-dim", type=int, default=CvaeConfig.latent_dim)
    sub.add_argument("--hidden", type=_parse_hidden, default=CvaeConfig.hidden,
                     help="comma-separated layer widths, e.g. 512,256")
    sub.add_argument("--epochs", type=int, default=CvaeConfig.epochs)
    sub.add_argument("--batch", type=int, default=CvaeConfig.batch_size)
    sub.add_argument("--lr", type=float, default=CvaeConfig.learning_rate)
    sub.add_argument("--kld-weight", type=float, default=CvaeConfig.kld_weight)
    sub.add_argument("--sigma-mode", choices=["log_variance", "paper_literal"],
                     default=CvaeConfig.sigma_mode)


def _cvae_config(args: argparse.Namespace) -> CvaeConfig:
    return CvaeConfig(
        latent_dim=args.latent_dim,
        hidden=tuple(args.hidden),
        epochs=args.epochs,
        batch_size=args.batch,
        learning_rate=args.lr,
        kld_weight=args.kld_weight,
        sigma_mode=args.sigma_mode,
        seed=args.seed,
    )


def _cvae_config_pairs(args: argparse.Namespace) -> list[tuple[str, object]]:
    return [
        ("latent_dim", args.latent_dim),
        ("hidden", ",".join(str(d) for d in args.hidden)),
        ("epochs", args.epochs),
        ("batch", args.batch),
        ("lr", args.lr),
        ("kld_weight", args.kld_weight),
        ("sigma_mode", args.sigma_mode),
    ]


def cmd_train(args: argparse.Namespace) -> int:
    _print_config("train", [("input", args.input), ("out", args.out)]
                  + _cvae_config_pairs(args) + [("seed", args.seed)])
    ds = load_dataset(args.input)
    model = train_cvae(ds, _cvae_config(args))
    save_model(model, args.out)
    losses_path = f"{args.out}.losses.csv"
    with open(losses_path, "w", encoding="utf-8") as fh:
        fh.write("epoch,kld,mse,total\n")
        for epoch, entry in enumerate(model.history, start=1):
            fh.write(f"{epoch},{entry.kld!r},{entry.mse!r},{entry.total!r}\n")
    print(f"trained on {len(ds)} rows (dim {ds.dim}); model -> {args.out}; "
          f"losses -> {losses_path}")
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    _print_config("synth", [
        ("model", args.model), ("input", args.input), ("out", args.out),
        ("count", args.count), ("label", args.label), ("format", args.format),
        ("seed", args.seed),
    ])
    model = load_model(args.model)
    if args.count == "auto":
        if args.input is None:
            raise UsageError("--count auto needs --input as the reference dataset")
        reference = load_dataset(args.input)
        if reference.dim != model.data_dim:
            raise VectorDataError(
                f"reference dimension {reference.dim} does not match "
                f"model dimension {model.data_dim}"
            )
        count = required_count(reference)
    else:
        try:
            count = int(args.count)
        except ValueError:
            raise UsageError(f"--count must be an integer or 'auto', got {args.count!r}")
        if count < 0:
            raise UsageError("--count must be non-negative")
    synthesized = generate(model, count, args.label, args.seed)
    save_dataset(synthesized, args.out, format=args.format)
    print(f"synthesized {count} rows of label {args.label} -> {args.out}")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    _print_config("eval", [
        ("input", args.input), ("k", args.k), ("classifier", args.classifier),
        ("protocol", args.protocol), ("augment", args.augment),
        ("knn_k", args.knn_k), ("tol", args.tol),
    ] + _cvae_config_pairs(args) + [
        ("seed", args.seed), ("report_csv", args.report_csv),
    ])
    ds = load_dataset(args.input)
    options: dict = {}
    if args.classifier == "knn":
        options["k"] = args.knn_k
    elif args.classifier == "lr":
        options["tolerance"] = args.tol
    result = run_cv(
        ds,
        k=args.k,
        classifier_kind=args.classifier,
        cvae_config=_cvae_config(args),
        protocol=args.protocol,
        augment=args.augment,
        seed=args.seed,
        classifier_options=options,
        dataset_name=pathlib.Path(args.input).stem,
    )
    for line in result.warnings:
        print(f"warning: {line}")
    print(report([result], "markdown_table"), end="")
    if args.report_csv:
        with open(args.report_csv, "w", encoding="utf-8") as fh:
            fh.write(report([result], "csv"))
        print(f"csv report -> {args.report_csv}")
    return 0


def cmd_dedup(args: argparse.Namespace) -> int:
    _print_config("dedup", [
        ("original", args.original), ("synthesized", args.synthesized),
        ("tol", args.tol),
    ])
    original = load_dataset(args.original)
    synthesized = load_dataset(args.synthesized)
    count = dedup_count(original, synthesized, tolerance=args.tol)
    original_pct = 100.0 * count / len(original) if len(original) else 0.0
    synthesized_pct = 100.0 * count / len(synthesized) if len(synthesized) else 0.0
    print(
        f"duplicated={count} "
        f"original_pct={original_pct:.2f} "
        f"synthesized_pct={synthesized_pct:.2f}"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vecbalance",
        description="Balance labeled vector datasets with a conditional VAE "
                    "and evaluate downstream classifiers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train a generator on a dataset")
    p_train.add_argument("--input", required=True, help="dataset file (binary or csv)")
    p_train.add_argument("--out", required=True, help="model file to write")
    _add_cvae_flags(p_train)
    p_train.add_argument("--seed", type=int, default=42)
    p_train.set_defaults(func=cmd_train)

    p_synth = sub.add_parser("synth", help="sample synthetic rows from a model")
    p_synth.add_argument("--model", required=True, help="trained model file")
    p_synth.add_argument("--input", help="reference dataset, required for --count auto")
    p_synth.add_argument("--out", required=True, help="dataset file to write")
    p_synth.add_argument("--count", default="auto",
                         help="row count, or 'auto' for the class-count gap")
    p_synth.add_argument("--label", type=int, choices=[0, 1], default=1)
    p_synth.add_argument("--format", choices=["binary", "csv"], default="binary")
    p_synth.add_argument("--seed", type=int, default=42)
    p_synth.set_defaults(func=cmd_synth)

    p_eval = sub.add_parser("eval", help="cross-validated evaluation")
    p_eval.add_argument("--input", required=True, help="dataset file")
    p_eval.add_argument("--k", type=int, default=5, help="fold count")
    p_eval.add_argument("--classifier", choices=["lr", "gnb", "knn", "mlp"], default="lr")
    p_eval.add_argument("--protocol", choices=["paper", "safe"], default="paper")
    p_eval.add_argument("--augment", choices=["cvae", "smote", "none"], default="cvae")
    p_eval.add_argument("--knn-k", type=int, default=5, help="neighbor count for knn")
    p_eval.add_argument("--tol", type=float, default=1e-6,
                        help="gradient-norm stop tolerance for lr")
    _add_cvae_flags(p_eval)
    p_eval.add_argument("--seed", type=int, default=42)
    p_eval.add_argument("--report-csv", help="also write the report as csv here")
    p_eval.set_defaults(func=cmd_eval)

    p_dedup = sub.add_parser("dedup", help="count synthesized rows duplicating originals")
    p_dedup.add_argument("original", help="original dataset file")
    p_dedup.add_argument("synthesized", help="synthesized dataset file")
    p_dedup.add_argument("--tol", type=float, default=0.0,
                         help="per-coordinate tolerance; 0 means exact equality")
    p_dedup.set_defaults(func=cmd_dedup)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (VectorDataError, ModelFileError, OSError, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except (TrainingDivergedError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
