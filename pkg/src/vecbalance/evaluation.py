"""Confusion counts, pd/pf/g-measure, cross-validation harness, report tables.

Two evaluation protocols are first-class:

* ``paper``: augment the whole dataset to balance, then stratified-k-fold the
  combined set. Synthetic rows can land in test folds; this reproduces the
  evaluate-after-augmenting pipeline (and its optimistic numbers) exactly.
* ``safe``: fold the original set, augment each training fold independently,
  and evaluate on untouched original rows only.

Every report row is labeled with its protocol so the two are never conflated.
"""

from __future__ import annotations

import io
import csv as csv_module
from dataclasses import dataclass, field, replace
from decimal import ROUND_HALF_UP, Decimal

import numpy as np

from .classify import MlpConfig, train_gnb, train_knn, train_lr, train_mlp_classifier
from .cvae import CvaeConfig, train_cvae
from .synth import augment_to_balance, smote_oversample
from .vecdata import EmbeddedDataset, stratified_kfold

PROTOCOLS = ("paper", "safe")
AUGMENTS = ("cvae", "smote", "none")

# stream tags for deriving independent per-purpose seeds from the run seed
_FOLD_STREAM = 0
_TRAIN_STREAM = 1
_GENERATE_STREAM = 2
_CLASSIFIER_STREAM = 3


class UndefinedMetricError(ValueError):
    """Raised when a confusion matrix has no rows of one actual class."""


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    fn: int
    tn: int

    def __post_init__(self):
        for name in ("tp", "fp", "fn", "tn"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class MetricsReport:
    pd: float
    pf: float
    g_measure: float
    confusion: ConfusionMatrix


@dataclass(frozen=True)
class MeanMetrics:
    pd: float
    pf: float
    g_measure: float


@dataclass
class CvResult:
    dataset_name: str
    classifier_kind: str
    protocol: str
    augment: str
    k: int
    seed: int
    per_fold: list  # MetricsReport, or None where metrics were undefined
    mean: MeanMetrics | None
    fold_seeds: list[int]
    warnings: list[str] = field(default_factory=list)
    fold_audits: list[dict] = field(default_factory=list)


def confusion(actual, predicted) -> ConfusionMatrix:
    """Count tp/fp/fn/tn with label 1 as the positive class."""
    actual = np.asarray(actual)
    predicted = np.asarray(predicted)
    if actual.shape != predicted.shape:
        raise ValueError(
            f"actual has {actual.shape} labels, predicted has {predicted.shape}"
        )
    pos = actual == 1
    pred_pos = predicted == 1
    return ConfusionMatrix(
        tp=int(np.sum(pos & pred_pos)),
        fp=int(np.sum(~pos & pred_pos)),
        fn=int(np.sum(pos & ~pred_pos)),
        tn=int(np.sum(~pos & ~pred_pos)),
    )


def metrics(cm: ConfusionMatrix) -> MetricsReport:
    """pd, pf and their harmonic combination, as percentages.

    pd = 100*tp/(tp+fn), pf = 100*fp/(fp+tn),
    g = 2*pd*(100-pf) / (pd + (100-pf)), pinned to 0 when pd and (100-pf)
    are both 0. Raises UndefinedMetricError when either actual class is
    absent; callers decide how to report such folds.
    """
    if cm.tp + cm.fn == 0:
        raise UndefinedMetricError("no actual positives: pd undefined")
    if cm.fp + cm.tn == 0:
        raise UndefinedMetricError("no actual negatives: pf undefined")
    pd = 100.0 * cm.tp / (cm.tp + cm.fn)
    pf = 100.0 * cm.fp / (cm.fp + cm.tn)
    spec = 100.0 - pf
    if pd == 0.0 and spec == 0.0:
        g = 0.0
    else:
        g = 2.0 * pd * spec / (pd + spec)
    return MetricsReport(pd=pd, pf=pf, g_measure=g, confusion=cm)


def round_half_up(value: float, places: int = 2) -> float:
    """Presentation rounding: 0.005 goes up, unlike round()."""
    quantum = Decimal(1).scaleb(-places)
    return float(Decimal(repr(float(value))).quantize(quantum, rounding=ROUND_HALF_UP))


def _derive_seed(*parts: int) -> int:
    return int(np.random.SeedSequence(list(parts)).generate_state(1)[0])


def _subset(ds: EmbeddedDataset, idx: np.ndarray) -> EmbeddedDataset:
    return EmbeddedDataset(
        dim=ds.dim,
        vectors=ds.vectors[idx],
        labels=ds.labels[idx],
        source_tag=ds.source_tag,
    )


def _concat(a: EmbeddedDataset, b: EmbeddedDataset) -> EmbeddedDataset:
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return EmbeddedDataset(
        dim=a.dim,
        vectors=np.concatenate([a.vectors, b.vectors]),
        labels=np.concatenate([a.labels, b.labels]),
        source_tag=a.source_tag,
    )


def _train_classifier(kind: str, ds: EmbeddedDataset, options: dict, seed: int):
    if kind == "lr":
        return train_lr(ds, seed=seed, **options)
    if kind == "gnb":
        return train_gnb(ds)
    if kind == "knn":
        return train_knn(ds, k=options.get("k", 5))
    if kind == "mlp":
        return train_mlp_classifier(ds, MlpConfig(seed=seed, **options))
    raise ValueError(f"unknown classifier kind {kind!r}")


def run_cv(
    ds: EmbeddedDataset,
    k: int = 5,
    classifier_kind: str = "lr",
    cvae_config: CvaeConfig | None = None,
    protocol: str = "paper",
    augment: str = "cvae",
    seed: int = 42,
    classifier_options: dict | None = None,
    dataset_name: str = "",
) -> CvResult:
    """Stratified k-fold evaluation under the chosen protocol and augmenter.

    All randomness (folding, CVAE training, generation, classifier init)
    derives from `seed`; the seed inside `cvae_config` is superseded so each
    fold gets its own independent stream. Folds whose test split lacks a
    class are reported as None with a warning and excluded from the mean.
    Each fold's audit records how many synthetic rows reached its train and
    test splits.
    """
    if protocol not in PROTOCOLS:
        raise ValueError(f"protocol must be one of {PROTOCOLS}")
    if augment not in AUGMENTS:
        raise ValueError(f"augment must be one of {AUGMENTS}")
    if cvae_config is None:
        cvae_config = CvaeConfig()
    options = dict(classifier_options or {})

    if protocol == "paper":
        if augment == "cvae":
            model = train_cvae(
                ds, replace(cvae_config, seed=_derive_seed(seed, _TRAIN_STREAM))
            )
            combined = augment_to_balance(ds, model, seed=_derive_seed(seed, _GENERATE_STREAM))
        elif augment == "smote":
            synth = smote_oversample(ds, seed=_derive_seed(seed, _GENERATE_STREAM))
            combined = _concat(ds, synth)
        else:
            combined = ds
        provenance = np.zeros(len(combined), dtype=np.uint8)
        provenance[len(ds):] = 1
        plan = stratified_kfold(combined, k, seed=_derive_seed(seed, _FOLD_STREAM))
        fold_sets = [
            (combined, plan.train_indices(i), plan.test_indices(i)) for i in range(k)
        ]
        fold_provenance = [provenance] * k
    else:
        plan = stratified_kfold(ds, k, seed=_derive_seed(seed, _FOLD_STREAM))
        fold_sets = []
        fold_provenance = []
        for i in range(k):
            train_idx = plan.train_indices(i)
            test_idx = plan.test_indices(i)
            train_orig = _subset(ds, train_idx)
            if augment == "cvae":
                model = train_cvae(
                    train_orig,
                    replace(cvae_config, seed=_derive_seed(seed, _TRAIN_STREAM, i)),
                )
                train_ds = augment_to_balance(
                    train_orig, model, seed=_derive_seed(seed, _GENERATE_STREAM, i)
                )
            elif augment == "smote":
                synth = smote_oversample(
                    train_orig, seed=_derive_seed(seed, _GENERATE_STREAM, i)
                )
                train_ds = _concat(train_orig, synth)
            else:
                train_ds = train_orig
            table = _concat(train_ds, _subset(ds, test_idx))
            prov = np.zeros(len(table), dtype=np.uint8)
            prov[len(train_orig) : len(train_ds)] = 1
            fold_sets.append(
                (table, np.arange(len(train_ds)), np.arange(len(train_ds), len(table)))
            )
            fold_provenance.append(prov)

    per_fold: list = []
    fold_seeds: list[int] = []
    warnings: list[str] = []
    fold_audits: list[dict] = []
    for i, (table, train_idx, test_idx) in enumerate(fold_sets):
        cls_seed = _derive_seed(seed, _CLASSIFIER_STREAM, i)
        fold_seeds.append(cls_seed)
        train_ds = _subset(table, train_idx)
        test_ds = _subset(table, test_idx)
        prov = fold_provenance[i]
        fold_audits.append(
            {
                "fold": i,
                "n_train": len(train_idx),
                "n_test": len(test_idx),
                "n_train_synthetic": int(prov[train_idx].sum()),
                "n_test_synthetic": int(prov[test_idx].sum()),
            }
        )
        cls = _train_classifier(classifier_kind, train_ds, options, cls_seed)
        predicted = cls.predict(test_ds.vectors)
        cm = confusion(test_ds.labels, predicted)
        try:
            per_fold.append(metrics(cm))
        except UndefinedMetricError as exc:
            per_fold.append(None)
            warnings.append(f"fold {i}: {exc}; excluded from mean")

    defined = [m for m in per_fold if m is not None]
    if defined:
        mean = MeanMetrics(
            pd=float(np.mean([m.pd for m in defined])),
            pf=float(np.mean([m.pf for m in defined])),
            g_measure=float(np.mean([m.g_measure for m in defined])),
        )
    else:
        mean = None
        warnings.append("all folds undefined: no mean")
    return CvResult(
        dataset_name=dataset_name,
        classifier_kind=classifier_kind,
        protocol=protocol,
        augment=augment,
        k=k,
        seed=seed,
        per_fold=per_fold,
        mean=mean,
        fold_seeds=fold_seeds,
        warnings=warnings,
        fold_audits=fold_audits,
    )


def _result_cells(result: CvResult) -> list[str]:
    if result.mean is None:
        values = ["n/a", "n/a", "n/a"]
    else:
        values = [
            f"{round_half_up(result.mean.g_measure):.2f}",
            f"{round_half_up(result.mean.pd):.2f}",
            f"{round_half_up(result.mean.pf):.2f}",
        ]
    return [
        result.dataset_name or "-",
        result.classifier_kind,
        result.protocol,
        result.augment,
    ] + values


def _average_cells(results) -> list[str]:
    defined = [r.mean for r in results if r.mean is not None]
    if not defined:
        return ["average", "", "", "", "n/a", "n/a", "n/a"]
    return [
        "average",
        "",
        "",
        "",
        f"{round_half_up(float(np.mean([m.g_measure for m in defined]))):.2f}",
        f"{round_half_up(float(np.mean([m.pd for m in defined]))):.2f}",
        f"{round_half_up(float(np.mean([m.pf for m in defined]))):.2f}",
    ]


REPORT_HEADER = ["dataset", "classifier", "protocol", "augment", "g_measure", "pd", "pf"]


def report(results, format: str = "markdown_table") -> str:
    """One row per result (mean over defined folds) plus an averages row."""
    results = list(results)
    if not results:
        raise ValueError("no results to report")
    rows = [_result_cells(r) for r in results] + [_average_cells(results)]
    if format == "markdown_table":
        lines = [
            "| " + " | ".join(REPORT_HEADER) + " |",
            "| " + " | ".join("---" for _ in REPORT_HEADER) + " |",
        ]
        lines += ["| " + " | ".join(row) + " |" for row in rows]
        return "\n".join(lines) + "\n"
    if format == "csv":
        buf = io.StringIO()
        writer = csv_module.writer(buf, lineterminator="\n")
        writer.writerow(REPORT_HEADER)
        writer.writerows(rows)
        return buf.getvalue()
    raise ValueError(f"format must be 'markdown_table' or 'csv', got {format!r}")
