"""Conditional VAE for labeled vectors: training, losses, serialization.

The encoder maps x concatenated with a one-hot class condition to a latent
mean and a spread parameter sigma; the decoder maps a latent sample plus the
same condition back to data space. Two sigma conventions are supported:

* ``log_variance`` (default): sigma is log-variance, z = m + exp(sigma/2) * u.
* ``paper_literal``: z = m + exp(sigma) * u, treating sigma's exponential
  directly as the noise scale.

Under either mode the divergence term is kld = -sum(1 + sigma - m^2 -
exp(sigma)) / 2 per sample and the reconstruction term is the per-dimension
mean squared error. Sigma is clamped to [-10, 10] before use and the clamp
zeroes its gradient outside that range.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass, field

import numpy as np

from .neuralnet import (
    Network,
    TrainingDivergedError,
    adam_init,
    adam_step,
    backward,
    forward,
    init_network,
)
from .vecdata import EmbeddedDataset, condition_matrix

SIGMA_MODES = ("log_variance", "paper_literal")
SIGMA_CLAMP = 10.0
MODEL_MAGIC = b"CVM1"
MODEL_FORMAT_VERSION = 1
N_CLASSES = 2


class ModelFileError(Exception):
    """Raised when a model file is not in the expected format."""


class ModelVersionError(ModelFileError):
    """Raised when a model file declares an unsupported format version."""


class ModelCorruptError(ModelFileError):
    """Raised when a model file is truncated or internally inconsistent."""


@dataclass(frozen=True)
class CvaeConfig:
    latent_dim: int = 64
    hidden: tuple[int, ...] = (512, 256)
    epochs: int = 100
    batch_size: int = 128
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    kld_weight: float = 1.0
    sigma_mode: str = "log_variance"
    seed: int = 42

    def __post_init__(self):
        if self.latent_dim <= 0:
            raise ValueError("latent_dim must be positive")
        if self.epochs < 0:
            raise ValueError("epochs must be non-negative")
        if self.batch_size <= 0:
            raise ValueError("batch_size must be positive")
        if self.sigma_mode not in SIGMA_MODES:
            raise ValueError(f"sigma_mode must be one of {SIGMA_MODES}")


@dataclass(frozen=True)
class LossBreakdown:
    kld: float
    mse: float
    total: float


@dataclass
class CvaeModel:
    encoder: Network
    decoder: Network
    data_dim: int
    latent_dim: int
    sigma_mode: str
    kld_weight: float
    seed: int
    history: list[LossBreakdown] = field(default_factory=list)

    def params(self) -> list[np.ndarray]:
        return self.encoder.params() + self.decoder.params()

    def astype(self, dtype) -> "CvaeModel":
        return CvaeModel(
            encoder=self.encoder.astype(dtype),
            decoder=self.decoder.astype(dtype),
            data_dim=self.data_dim,
            latent_dim=self.latent_dim,
            sigma_mode=self.sigma_mode,
            kld_weight=self.kld_weight,
            seed=self.seed,
            history=list(self.history),
        )


def build_model(data_dim: int, config: CvaeConfig) -> CvaeModel:
    """Initialize encoder/decoder networks without training."""
    if data_dim <= 0:
        raise ValueError("data_dim must be positive")
    hidden = list(config.hidden)
    enc_dims = [data_dim + N_CLASSES] + hidden + [2 * config.latent_dim]
    dec_dims = [config.latent_dim + N_CLASSES] + hidden[::-1] + [data_dim]
    enc_acts = ["relu"] * len(hidden) + ["identity"]
    dec_acts = ["relu"] * len(hidden) + ["identity"]
    encoder = init_network(enc_dims, enc_acts, seed=config.seed)
    decoder = init_network(dec_dims, dec_acts, seed=config.seed + 1)
    return CvaeModel(
        encoder=encoder,
        decoder=decoder,
        data_dim=data_dim,
        latent_dim=config.latent_dim,
        sigma_mode=config.sigma_mode,
        kld_weight=config.kld_weight,
        seed=config.seed,
    )


def _split_encoder_output(out: np.ndarray, latent_dim: int):
    m = out[..., :latent_dim]
    sigma_raw = out[..., latent_dim:]
    return m, sigma_raw


def encode(model: CvaeModel, x: np.ndarray, c: np.ndarray):
    """Return (m, sigma) for one vector or a batch; sigma arrives clamped."""
    xc = np.concatenate([np.atleast_2d(x), np.atleast_2d(c)], axis=1)
    out, _ = forward(model.encoder, xc if np.asarray(x).ndim == 2 else xc[0])
    m, sigma_raw = _split_encoder_output(out, model.latent_dim)
    return m, np.clip(sigma_raw, -SIGMA_CLAMP, SIGMA_CLAMP)


def decode(model: CvaeModel, z: np.ndarray, c: np.ndarray) -> np.ndarray:
    zc = np.concatenate([np.atleast_2d(z), np.atleast_2d(c)], axis=1)
    out, _ = forward(model.decoder, zc if np.asarray(z).ndim == 2 else zc[0])
    return out


def noise_scale(sigma: np.ndarray, sigma_mode: str) -> np.ndarray:
    if sigma_mode == "log_variance":
        return np.exp(sigma / 2)
    if sigma_mode == "paper_literal":
        return np.exp(sigma)
    raise ValueError(f"sigma_mode must be one of {SIGMA_MODES}")


def reparameterize(m: np.ndarray, sigma: np.ndarray, u, sigma_mode: str = "log_variance"):
    """z = m + scale(sigma) * u; with u = 0 this returns m exactly."""
    if sigma_mode not in SIGMA_MODES:
        raise ValueError(f"sigma_mode must be one of {SIGMA_MODES}")
    m = np.asarray(m)
    sigma = np.asarray(sigma)
    if m.shape != sigma.shape:
        raise ValueError(f"m shape {m.shape} does not match sigma shape {sigma.shape}")
    u = np.broadcast_to(np.asarray(u, dtype=m.dtype), m.shape)
    if not np.any(u):
        return m.copy()
    return m + noise_scale(sigma, sigma_mode) * u


def kld_loss(m: np.ndarray, sigma: np.ndarray) -> float:
    """-sum(1 + sigma - m^2 - exp(sigma)) / 2, summed over latent dims.

    For a batch the per-sample values are averaged. Always non-negative
    because exp(sigma) >= 1 + sigma.
    """
    m = np.asarray(m, dtype=np.float64)
    sigma = np.asarray(sigma, dtype=np.float64)
    if m.shape != sigma.shape:
        raise ValueError(f"m shape {m.shape} does not match sigma shape {sigma.shape}")
    per_sample = -np.sum(1 + sigma - np.square(m) - np.exp(sigma), axis=-1) / 2
    return float(np.mean(per_sample))


def mse_loss(x: np.ndarray, x_rec: np.ndarray) -> float:
    """Per-dimension mean squared reconstruction error, averaged over a batch."""
    x = np.asarray(x, dtype=np.float64)
    x_rec = np.asarray(x_rec, dtype=np.float64)
    if x.shape != x_rec.shape:
        raise ValueError(f"x shape {x.shape} does not match x_rec shape {x_rec.shape}")
    per_sample = np.mean(np.square(x - x_rec), axis=-1)
    return float(np.mean(per_sample))


def cvae_forward(model: CvaeModel, x: np.ndarray, c: np.ndarray, u: np.ndarray):
    """Full pass over a batch with fixed noise u.

    Returns (LossBreakdown, aux) where aux carries everything backward needs.
    """
    x = np.atleast_2d(np.asarray(x))
    c = np.atleast_2d(np.asarray(c))
    u = np.atleast_2d(np.asarray(u))
    if x.shape[0] != c.shape[0] or x.shape[0] != u.shape[0]:
        raise ValueError("x, c and u must have the same number of rows")
    if u.shape[1] != model.latent_dim:
        raise ValueError(f"u has {u.shape[1]} columns, latent_dim is {model.latent_dim}")
    enc_out, enc_cache = forward(model.encoder, np.concatenate([x, c], axis=1))
    m, sigma_raw = _split_encoder_output(enc_out, model.latent_dim)
    sigma = np.clip(sigma_raw, -SIGMA_CLAMP, SIGMA_CLAMP)
    scale = noise_scale(sigma, model.sigma_mode)
    z = m + scale * u.astype(m.dtype, copy=False)
    x_rec, dec_cache = forward(model.decoder, np.concatenate([z, c], axis=1))
    kld = kld_loss(m, sigma)
    mse = mse_loss(x, x_rec)
    losses = LossBreakdown(kld=kld, mse=mse, total=model.kld_weight * kld + mse)
    aux = {
        "x": x,
        "u": u,
        "m": m,
        "sigma": sigma,
        "sigma_raw": sigma_raw,
        "scale": scale,
        "x_rec": x_rec,
        "enc_cache": enc_cache,
        "dec_cache": dec_cache,
    }
    return losses, aux


def cvae_gradients(model: CvaeModel, aux):
    """Gradients of the batch loss, aligned with model.params()."""
    x = aux["x"]
    u = aux["u"]
    m = aux["m"]
    sigma = aux["sigma"]
    scale = aux["scale"]
    x_rec = aux["x_rec"]
    n, d = x.shape
    lat = model.latent_dim
    dtype = m.dtype

    # mse: mean over batch of per-sample mean over dims
    d_xrec = (2.0 / (n * d)) * (x_rec - x).astype(dtype, copy=False)
    dec_grads, d_zc = backward(model.decoder, aux["dec_cache"], d_xrec)
    d_z = d_zc[:, :lat]

    w = model.kld_weight / n
    d_m = d_z + (w * m).astype(dtype, copy=False)
    if model.sigma_mode == "log_variance":
        d_scale_d_sigma = scale / 2
    else:
        d_scale_d_sigma = scale
    d_sigma = d_z * u.astype(dtype, copy=False) * d_scale_d_sigma
    d_sigma = d_sigma + (w * (np.exp(sigma) - 1) / 2).astype(dtype, copy=False)
    inside = np.abs(aux["sigma_raw"]) < SIGMA_CLAMP
    d_sigma = np.where(inside, d_sigma, 0).astype(dtype, copy=False)

    d_enc_out = np.concatenate([d_m, d_sigma], axis=1)
    enc_grads, _ = backward(model.encoder, aux["enc_cache"], d_enc_out)
    return enc_grads + dec_grads


def train_cvae(dataset: EmbeddedDataset, config: CvaeConfig) -> CvaeModel:
    """Train on every row of the dataset, conditioning on its label.

    Deterministic for a fixed config: one generator seeds the epoch shuffles
    and the per-batch noise draws. Raises TrainingDivergedError the moment a
    batch loss turns non-finite, naming the epoch and batch.
    """
    if len(dataset) == 0:
        raise ValueError("cannot train on an empty dataset")
    model = build_model(dataset.dim, config)
    conditions = condition_matrix(dataset.labels)
    rng = np.random.Generator(np.random.PCG64(config.seed))
    params = model.params()
    opt = adam_init(
        params,
        learning_rate=config.learning_rate,
        beta1=config.beta1,
        beta2=config.beta2,
        epsilon=config.epsilon,
    )
    n = len(dataset)
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        kld_sum = 0.0
        mse_sum = 0.0
        for batch_index, start in enumerate(range(0, n, config.batch_size)):
            idx = order[start : start + config.batch_size]
            x = dataset.vectors[idx]
            c = conditions[idx]
            u = rng.standard_normal((len(idx), config.latent_dim)).astype(np.float32)
            try:
                losses, aux = cvae_forward(model, x, c, u)
            except (ValueError, FloatingPointError) as exc:
                # rows and shapes were validated up front, so a rejected
                # forward here means the parameters blew up
                raise TrainingDivergedError(
                    f"non-finite values at epoch {epoch} batch {batch_index}"
                ) from exc
            if not np.isfinite(losses.total):
                raise TrainingDivergedError(
                    f"non-finite loss at epoch {epoch} batch {batch_index}"
                )
            grads = cvae_gradients(model, aux)
            adam_step(params, grads, opt)
            kld_sum += losses.kld * len(idx)
            mse_sum += losses.mse * len(idx)
        kld = kld_sum / n
        mse = mse_sum / n
        model.history.append(
            LossBreakdown(kld=kld, mse=mse, total=config.kld_weight * kld + mse)
        )
    return model


def model_hash(model: CvaeModel) -> str:
    """Short content hash over all parameters (as stored: little-endian float32)."""
    h = hashlib.sha256()
    for p in model.params():
        h.update(np.ascontiguousarray(p, dtype="<f4").tobytes())
    return h.hexdigest()[:12]


def _param_entries(model: CvaeModel):
    entries = []
    for net_name, net in (("encoder", model.encoder), ("decoder", model.decoder)):
        for i, layer in enumerate(net.layers):
            entries.append((f"{net_name}.{i}.weights", layer.weights))
            entries.append((f"{net_name}.{i}.biases", layer.biases))
    return entries


def save_model(model: CvaeModel, path) -> None:
    """Write magic, a length-prefixed JSON header, then raw float32 parameters."""
    entries = _param_entries(model)
    meta = {
        "format_version": MODEL_FORMAT_VERSION,
        "data_dim": model.data_dim,
        "latent_dim": model.latent_dim,
        "sigma_mode": model.sigma_mode,
        "kld_weight": model.kld_weight,
        "seed": model.seed,
        "history": [
            {"kld": h.kld, "mse": h.mse, "total": h.total} for h in model.history
        ],
        "encoder": {"dims": model.encoder.dims(), "activations": model.encoder.activations()},
        "decoder": {"dims": model.decoder.dims(), "activations": model.decoder.activations()},
        "params": [[name, list(arr.shape)] for name, arr in entries],
    }
    blob = json.dumps(meta, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MODEL_MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        for _, arr in entries:
            fh.write(np.ascontiguousarray(arr, dtype="<f4").tobytes())


def load_model(path) -> CvaeModel:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 8 or raw[:4] != MODEL_MAGIC:
        raise ModelFileError(f"{path}: not a model file (bad magic)")
    (json_len,) = struct.unpack_from("<I", raw, 4)
    if len(raw) < 8 + json_len:
        raise ModelCorruptError(f"{path}: truncated metadata block")
    try:
        meta = json.loads(raw[8 : 8 + json_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelCorruptError(f"{path}: unreadable metadata: {exc}") from exc
    version = meta.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise ModelVersionError(
            f"{path}: format version {version!r}, expected {MODEL_FORMAT_VERSION}"
        )
    if meta.get("sigma_mode") not in SIGMA_MODES:
        raise ModelCorruptError(f"{path}: unknown sigma_mode {meta.get('sigma_mode')!r}")

    off = 8 + json_len
    arrays = {}
    for name, shape in meta["params"]:
        count = int(np.prod(shape, dtype=np.int64)) if shape else 1
        nbytes = count * 4
        if off + nbytes > len(raw):
            raise ModelCorruptError(f"{path}: truncated parameter block {name}")
        arrays[name] = (
            np.frombuffer(raw, dtype="<f4", count=count, offset=off)
            .reshape(shape)
            .copy()
        )
        off += nbytes
    if off != len(raw):
        raise ModelCorruptError(f"{path}: {len(raw) - off} unexpected trailing bytes")

    def rebuild(net_name: str, desc) -> Network:
        from .neuralnet import DenseLayer

        dims = desc["dims"]
        acts = desc["activations"]
        layers = []
        for i, act in enumerate(acts):
            try:
                w = arrays[f"{net_name}.{i}.weights"]
                b = arrays[f"{net_name}.{i}.biases"]
            except KeyError as exc:
                raise ModelCorruptError(f"{path}: missing parameter block {exc}") from exc
            if w.shape != (dims[i + 1], dims[i]) or b.shape != (dims[i + 1],):
                raise ModelCorruptError(
                    f"{path}: parameter shape mismatch for {net_name} layer {i}"
                )
            layers.append(DenseLayer(w, b, act))
        return Network(layers)

    history = [
        LossBreakdown(kld=h["kld"], mse=h["mse"], total=h["total"])
        for h in meta.get("history", [])
    ]
    return CvaeModel(
        encoder=rebuild("encoder", meta["encoder"]),
        decoder=rebuild("decoder", meta["decoder"]),
        data_dim=int(meta["data_dim"]),
        latent_dim=int(meta["latent_dim"]),
        sigma_mode=meta["sigma_mode"],
        kld_weight=float(meta["kld_weight"]),
        seed=int(meta.get("seed", 0)),
        history=history,
    )
