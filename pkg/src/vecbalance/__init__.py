"""Rebalance imbalanced labeled vector datasets with a conditional VAE.

The pieces compose into one pipeline: load labeled vectors (vecdata), train
a conditional generator (cvae), synthesize minority rows until the classes
balance (synth), then measure what a downstream classifier gains (classify,
evaluation). The cli module wires the stages into one command.
"""

from .classify import (
    MlpConfig,
    TrainedClassifier,
    train_gnb,
    train_knn,
    train_lr,
    train_mlp_classifier,
)
from .cvae import (
    CvaeConfig,
    CvaeModel,
    LossBreakdown,
    decode,
    encode,
    kld_loss,
    load_model,
    mse_loss,
    reparameterize,
    save_model,
    train_cvae,
)
from .evaluation import (
    ConfusionMatrix,
    CvResult,
    MetricsReport,
    confusion,
    metrics,
    report,
    run_cv,
)
from .synth import augment_to_balance, generate, required_count, smote_oversample
from .vecdata import (
    EmbeddedDataset,
    FoldPlan,
    dedup_count,
    dedup_within,
    load_dataset,
    save_dataset,
    stratified_kfold,
)

__all__ = [
    "CvaeConfig",
    "CvaeModel",
    "ConfusionMatrix",
    "CvResult",
    "EmbeddedDataset",
    "FoldPlan",
    "LossBreakdown",
    "MetricsReport",
    "MlpConfig",
    "TrainedClassifier",
    "augment_to_balance",
    "confusion",
    "decode",
    "dedup_count",
    "dedup_within",
    "encode",
    "generate",
    "kld_loss",
    "load_dataset",
    "load_model",
    "metrics",
    "mse_loss",
    "reparameterize",
    "report",
    "required_count",
    "run_cv",
    "save_dataset",
    "save_model",
    "smote_oversample",
    "stratified_kfold",
    "train_cvae",
    "train_gnb",
    "train_knn",
    "train_lr",
    "train_mlp_classifier",
]

__version__ = "0.1.0"
