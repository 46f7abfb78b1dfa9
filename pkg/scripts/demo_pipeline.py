"""Cross-validated comparison of augmentation strategies on one dataset.

Runs every requested classifier under every requested augmentation and prints
a markdown report, so the effect of oversampling on pd/pf/g is visible side
by side. Expect a couple of minutes with the default generator settings.
"""

import argparse
from pathlib import Path

from vecbalance import CvaeConfig, load_dataset, report, run_cv


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--input", type=Path, required=True)
    parser.add_argument("--classifiers", default="lr,gnb,knn",
                        help="comma list drawn from lr,gnb,knn,mlp")
    parser.add_argument("--augments", default="none,cvae,smote",
                        help="comma list drawn from none,cvae,smote")
    parser.add_argument("--protocol", choices=("paper", "safe"), default="paper")
    parser.add_argument("--k", type=int, default=5)
    parser.add_argument("--epochs", type=int, default=50)
    parser.add_argument("--latent-dim", type=int, default=8)
    parser.add_argument("--hidden", default="64,32")
    parser.add_argument("--seed", type=int, default=42)
    args = parser.parse_args()

    ds = load_dataset(args.input)
    cfg = CvaeConfig(
        latent_dim=args.latent_dim,
        hidden=tuple(int(h) for h in args.hidden.split(",")),
        epochs=args.epochs,
        seed=args.seed,
    )
    name = args.input.stem
    results = []
    for augment in args.augments.split(","):
        for kind in args.classifiers.split(","):
            result = run_cv(
                ds,
                k=args.k,
                classifier_kind=kind,
                protocol=args.protocol,
                augment=augment,
                cvae_config=cfg,
                seed=args.seed,
                dataset_name=name,
            )
            results.append(result)
            for w in result.warnings:
                print(f"warning [{kind}/{augment}]: {w}")
    print(report(results))


if __name__ == "__main__":
    main()
