"""Binary classifiers over embedded vectors: LR, Gaussian NB, KNN, MLP.

All four train deterministically (given seeds) and expose positive-class
scores in [0, 1]. LR, GNB and MLP label 1 exactly when score >= threshold;
KNN labels by majority vote among the k nearest rows, breaking ties toward
the single nearest neighbor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import neuralnet
from .neuralnet import TrainingDivergedError, sigmoid
from .vecdata import EmbeddedDataset

KINDS = ("lr", "gnb", "knn", "mlp")


@dataclass
class TrainedClassifier:
    kind: str
    parameters: dict
    threshold: float = 0.5

    def _check_input(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        if single:
            x = x[None, :]
        dim = self.parameters["dim"]
        if x.ndim != 2 or x.shape[1] != dim:
            raise ValueError(f"input has shape {x.shape}, classifier expects dimension {dim}")
        return x

    def scores(self, x: np.ndarray) -> np.ndarray:
        """Positive-class score per row, in [0, 1]."""
        single = np.asarray(x).ndim == 1
        batch = self._check_input(x)
        out = _SCORERS[self.kind](self.parameters, batch)
        return out[0] if single else out

    def predict(self, x: np.ndarray) -> np.ndarray:
        single = np.asarray(x).ndim == 1
        batch = self._check_input(x)
        if self.kind == "knn":
            labels = _knn_vote(self.parameters, batch)
        else:
            labels = (
                _SCORERS[self.kind](self.parameters, batch) >= self.threshold
            ).astype(np.uint8)
        return labels[0] if single else labels


def predict(cls: TrainedClassifier, x: np.ndarray):
    """Single-vector convenience: returns (label, score)."""
    x = np.asarray(x)
    if x.ndim != 1:
        raise ValueError(f"expected a single vector, got shape {x.shape}")
    return int(cls.predict(x)), float(cls.scores(x))


def _require_both_classes(ds: EmbeddedDataset) -> None:
    counts = ds.class_counts()
    if counts.nsbr == 0 or counts.sbr == 0:
        raise ValueError(
            f"dataset must contain both classes (have {counts.nsbr} of label 0, "
            f"{counts.sbr} of label 1)"
        )


# ---------------------------------------------------------------- logistic


def _lr_scores(params: dict, x: np.ndarray) -> np.ndarray:
    return sigmoid(x @ params["weights"] + params["bias"])


def train_lr(
    ds: EmbeddedDataset,
    l2_strength: float = 1.0,
    max_iterations: int = 1000,
    tolerance: float = 1e-6,
    seed: int = 0,
) -> TrainedClassifier:
    """Full-batch gradient descent on mean cross-entropy + (l2/2)*||w||^2.

    The bias is not penalized. Each iteration backtracks (step halving) until
    the Armijo condition holds, so the loss never increases. Stops early when
    the gradient norm drops below `tolerance`. `seed` is accepted for API
    uniformity; the zero init makes the fit deterministic without it.
    """
    del seed
    _require_both_classes(ds)
    x = ds.vectors.astype(np.float64)
    y = ds.labels.astype(np.float64)
    n, d = x.shape
    w = np.zeros(d)
    b = 0.0

    def loss_at(w, b):
        s = x @ w + b
        ce = np.mean(np.logaddexp(0.0, s) - y * s)
        return ce + 0.5 * l2_strength * np.dot(w, w)

    current = loss_at(w, b)
    for _ in range(max_iterations):
        p = sigmoid(x @ w + b)
        residual = p - y
        gw = x.T @ residual / n + l2_strength * w
        gb = float(np.mean(residual))
        grad_sq = np.dot(gw, gw) + gb * gb
        if np.sqrt(grad_sq) < tolerance:
            break
        step = 1.0
        while True:
            trial = loss_at(w - step * gw, b - step * gb)
            if trial <= current - 1e-4 * step * grad_sq:
                break
            step /= 2
            if step < 1e-20:
                break
        w = w - step * gw
        b = b - step * gb
        current = loss_at(w, b)
    return TrainedClassifier("lr", {"dim": d, "weights": w, "bias": b})


# ------------------------------------------------------------- naive Bayes

VARIANCE_FLOOR = 1e-9


def _gnb_log_joint(params: dict, x: np.ndarray) -> np.ndarray:
    out = np.empty((x.shape[0], 2))
    for label in (0, 1):
        mean = params["means"][label]
        var = params["variances"][label]
        out[:, label] = params["log_priors"][label] - 0.5 * np.sum(
            np.log(2 * np.pi * var) + np.square(x - mean) / var, axis=1
        )
    return out


def _gnb_scores(params: dict, x: np.ndarray) -> np.ndarray:
    joint = _gnb_log_joint(params, x)
    shifted = joint - joint.max(axis=1, keepdims=True)
    probs = np.exp(shifted)
    return probs[:, 1] / probs.sum(axis=1)


def train_gnb(ds: EmbeddedDataset) -> TrainedClassifier:
    """Class priors plus per-class diagonal Gaussians, variances floored."""
    _require_both_classes(ds)
    x = ds.vectors.astype(np.float64)
    means, variances, log_priors = [], [], []
    for label in (0, 1):
        rows = x[ds.labels == label]
        means.append(rows.mean(axis=0))
        variances.append(np.maximum(rows.var(axis=0), VARIANCE_FLOOR))
        log_priors.append(np.log(len(rows) / len(ds)))
    return TrainedClassifier(
        "gnb",
        {
            "dim": ds.dim,
            "means": means,
            "variances": variances,
            "log_priors": log_priors,
        },
    )


# ----------------------------------------------------------------------- knn


def _knn_neighbor_labels(params: dict, x: np.ndarray) -> np.ndarray:
    train = params["rows"]
    k = params["k"]
    labels = params["labels"]
    out = np.empty((x.shape[0], k), dtype=np.uint8)
    for i, q in enumerate(x):
        dist = np.sqrt(np.sum(np.square(train - q), axis=1))
        nearest = np.argsort(dist, kind="stable")[:k]
        out[i] = labels[nearest]
    return out


def _knn_scores(params: dict, x: np.ndarray) -> np.ndarray:
    votes = _knn_neighbor_labels(params, x)
    return votes.sum(axis=1) / params["k"]


def _knn_vote(params: dict, x: np.ndarray) -> np.ndarray:
    votes = _knn_neighbor_labels(params, x)
    k = params["k"]
    positive = votes.sum(axis=1).astype(np.int64)
    labels = np.where(2 * positive > k, 1, 0).astype(np.uint8)
    tied = 2 * positive == k
    labels[tied] = votes[tied, 0]
    return labels


def train_knn(ds: EmbeddedDataset, k: int = 5) -> TrainedClassifier:
    if k < 1:
        raise ValueError("k must be at least 1")
    if k > len(ds):
        raise ValueError(f"k={k} exceeds the {len(ds)} training rows")
    return TrainedClassifier(
        "knn",
        {
            "dim": ds.dim,
            "rows": ds.vectors.astype(np.float64),
            "labels": ds.labels.copy(),
            "k": k,
        },
    )


# ----------------------------------------------------------------------- mlp


@dataclass(frozen=True)
class MlpConfig:
    hidden_dims: tuple[int, ...] = (100,)
    epochs: int = 200
    batch_size: int = 128
    learning_rate: float = 1e-3
    seed: int = 0


def _mlp_scores(params: dict, x: np.ndarray) -> np.ndarray:
    out, _ = neuralnet.forward(params["network"], x)
    return out[:, 0]


def train_mlp_classifier(ds: EmbeddedDataset, config: MlpConfig = MlpConfig()) -> TrainedClassifier:
    """Feed-forward net, sigmoid output, cross-entropy loss, Adam.

    Training runs on the logits (the cross-entropy gradient at the logit is
    score - target, which stays finite even for saturated scores); the stored
    network carries the sigmoid on its final layer so forward() yields scores.
    """
    _require_both_classes(ds)
    dims = [ds.dim] + list(config.hidden_dims) + [1]
    acts = ["relu"] * len(config.hidden_dims) + ["identity"]
    net = neuralnet.init_network(dims, acts, seed=config.seed)
    params = net.params()
    opt = neuralnet.adam_init(params, learning_rate=config.learning_rate)
    x_all = ds.vectors
    y_all = ds.labels.astype(np.float32)
    rng = np.random.Generator(np.random.PCG64(config.seed))
    n = len(ds)
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        for batch_index, start in enumerate(range(0, n, config.batch_size)):
            idx = order[start : start + config.batch_size]
            logits, cache = neuralnet.forward(net, x_all[idx])
            p = sigmoid(logits[:, 0])
            loss = float(
                np.mean(np.logaddexp(0.0, logits[:, 0]) - y_all[idx] * logits[:, 0])
            )
            if not np.isfinite(loss):
                raise TrainingDivergedError(
                    f"non-finite loss at epoch {epoch} batch {batch_index}"
                )
            dlogit = ((p - y_all[idx]) / len(idx)).astype(np.float32)[:, None]
            grads, _ = neuralnet.backward(net, cache, dlogit)
            neuralnet.adam_step(params, grads, opt)
    scored = net.copy()
    scored.layers[-1].activation = "sigmoid"
    return TrainedClassifier("mlp", {"dim": ds.dim, "network": scored})


_SCORERS = {
    "lr": _lr_scores,
    "gnb": _gnb_scores,
    "knn": _knn_scores,
    "mlp": _mlp_scores,
}
