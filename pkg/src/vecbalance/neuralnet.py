"""Minimal dense-network engine: forward pass, manual backprop, Adam, gradient checks.

Parameters live in float32 by default; loss reductions accumulate in float64.
Everything is deterministic given explicit seeds -- no global random state.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ACTIVATIONS = ("relu", "identity", "sigmoid")


class TrainingDivergedError(RuntimeError):
    """Raised when a training loss turns NaN or infinite."""


def _apply_activation(name: str, pre: np.ndarray) -> np.ndarray:
    if name == "relu":
        return np.maximum(pre, 0)
    if name == "identity":
        return pre
    if name == "sigmoid":
        return sigmoid(pre)
    raise ValueError(f"unknown activation {name!r}")


def _activation_grad(name: str, pre: np.ndarray, post: np.ndarray) -> np.ndarray:
    if name == "relu":
        return (pre > 0).astype(pre.dtype)
    if name == "identity":
        return np.ones_like(pre)
    if name == "sigmoid":
        return post * (1 - post)
    raise ValueError(f"unknown activation {name!r}")


def sigmoid(x: np.ndarray) -> np.ndarray:
    # split by sign to avoid overflow in exp
    out = np.empty_like(x, dtype=x.dtype if np.issubdtype(x.dtype, np.floating) else np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


@dataclass
class DenseLayer:
    weights: np.ndarray  # (out_dim, in_dim)
    biases: np.ndarray  # (out_dim,)
    activation: str

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]


@dataclass
class Network:
    layers: list[DenseLayer]

    def __post_init__(self):
        for a, b in zip(self.layers, self.layers[1:]):
            if a.out_dim != b.in_dim:
                raise ValueError(
                    f"layer dims incompatible: {a.out_dim} -> {b.in_dim}"
                )

    @property
    def in_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def out_dim(self) -> int:
        return self.layers[-1].out_dim

    def dims(self) -> list[int]:
        return [self.in_dim] + [l.out_dim for l in self.layers]

    def activations(self) -> list[str]:
        return [l.activation for l in self.layers]

    def params(self) -> list[np.ndarray]:
        """Flat parameter list [W0, b0, W1, b1, ...] sharing layer storage."""
        out = []
        for l in self.layers:
            out.append(l.weights)
            out.append(l.biases)
        return out

    def astype(self, dtype) -> "Network":
        return Network(
            [
                DenseLayer(l.weights.astype(dtype), l.biases.astype(dtype), l.activation)
                for l in self.layers
            ]
        )

    def copy(self) -> "Network":
        return self.astype(self.layers[0].weights.dtype)


def init_network(layer_dims, activations, seed: int, dtype=np.float32) -> Network:
    """Glorot-uniform weights, zero biases, deterministic for a fixed seed."""
    dims = list(layer_dims)
    if len(dims) < 2:
        raise ValueError("need at least input and output dimensions")
    if any(d <= 0 for d in dims):
        raise ValueError(f"dimensions must be positive: {dims}")
    acts = list(activations)
    if len(acts) != len(dims) - 1:
        raise ValueError(f"{len(dims) - 1} layers but {len(acts)} activations")
    for a in acts:
        if a not in ACTIVATIONS:
            raise ValueError(f"unknown activation {a!r}")
    rng = np.random.Generator(np.random.PCG64(seed))
    layers = []
    for in_dim, out_dim, act in zip(dims, dims[1:], acts):
        bound = np.sqrt(6.0 / (in_dim + out_dim))
        w = rng.uniform(-bound, bound, size=(out_dim, in_dim)).astype(dtype)
        b = np.zeros(out_dim, dtype=dtype)
        layers.append(DenseLayer(w, b, act))
    return Network(layers)


def forward(net: Network, x: np.ndarray):
    """Run the network on a vector or a (batch, in_dim) matrix.

    Returns (output, cache); the cache holds per-layer inputs, pre-activations
    and activations, enough for backward().
    """
    x = np.asarray(x)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.shape[1] != net.in_dim:
        raise ValueError(f"input has {x.shape[1]} features, network expects {net.in_dim}")
    if not np.isfinite(x).all():
        raise ValueError("non-finite network input")
    inputs, pres, posts = [], [], []
    a = x
    for layer in net.layers:
        inputs.append(a)
        pre = a @ layer.weights.T + layer.biases
        post = _apply_activation(layer.activation, pre)
        pres.append(pre)
        posts.append(post)
        a = post
    cache = {"inputs": inputs, "pres": pres, "posts": posts, "single": single}
    return (a[0] if single else a), cache


def backward(net: Network, cache, output_gradient: np.ndarray):
    """Chain rule through all layers.

    output_gradient is dLoss/d(output), shaped like the forward output.
    Returns (param_gradients, input_gradient) with param_gradients aligned
    with Network.params().
    """
    grad = np.asarray(output_gradient)
    if cache["single"]:
        grad = grad[None, :]
    if len(cache["pres"]) != len(net.layers):
        raise ValueError("cache does not match this network")
    if grad.shape != cache["posts"][-1].shape:
        raise ValueError(
            f"output gradient shape {grad.shape} does not match cached "
            f"forward output {cache['posts'][-1].shape}"
        )
    w_grads: list[np.ndarray] = [None] * len(net.layers)
    b_grads: list[np.ndarray] = [None] * len(net.layers)
    for i in range(len(net.layers) - 1, -1, -1):
        layer = net.layers[i]
        if cache["inputs"][i].shape[1] != layer.in_dim:
            raise ValueError("cache does not match this network")
        dpre = grad * _activation_grad(layer.activation, cache["pres"][i], cache["posts"][i])
        w_grads[i] = dpre.T @ cache["inputs"][i]
        b_grads[i] = dpre.sum(axis=0)
        grad = dpre @ layer.weights
    param_grads = []
    for wg, bg in zip(w_grads, b_grads):
        param_grads.append(wg)
        param_grads.append(bg)
    return param_grads, (grad[0] if cache["single"] else grad)


@dataclass
class AdamState:
    first_moment: list[np.ndarray]
    second_moment: list[np.ndarray]
    step_count: int = 0
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8


def adam_init(params, learning_rate=1e-3, beta1=0.9, beta2=0.999, epsilon=1e-8) -> AdamState:
    return AdamState(
        first_moment=[np.zeros_like(p) for p in params],
        second_moment=[np.zeros_like(p) for p in params],
        learning_rate=learning_rate,
        beta1=beta1,
        beta2=beta2,
        epsilon=epsilon,
    )


def adam_step(params, grads, state: AdamState):
    """Standard Adam update with bias correction, applied in place.

    Returns (params, state) for convenience; arrays are mutated.
    """
    if len(params) != len(grads) or len(params) != len(state.first_moment):
        raise ValueError("params, grads and state must have matching lengths")
    for p, g in zip(params, grads):
        if p.shape != g.shape:
            raise ValueError(f"gradient shape {g.shape} does not match parameter {p.shape}")
    state.step_count += 1
    t = state.step_count
    b1, b2 = state.beta1, state.beta2
    for p, g, m, v in zip(params, grads, state.first_moment, state.second_moment):
        m *= b1
        m += (1 - b1) * g
        v *= b2
        v += (1 - b2) * np.square(g)
        m_hat = m / (1 - b1**t)
        v_hat = v / (1 - b2**t)
        p -= (state.learning_rate * m_hat / (np.sqrt(v_hat) + state.epsilon)).astype(
            p.dtype, copy=False
        )
    return params, state


def gradient_check(net: Network, loss, x, h: float = 1e-4, n_samples=None, seed: int = 0):
    """Compare backward() gradients against central finite differences.

    `loss` maps the forward output to (value, gradient_wrt_output). Parameters
    whose +-h perturbation flips a relu activation pattern are skipped (the
    loss is non-differentiable at such kinks). Returns the max relative error
    over the checked parameters. Note h below ~1e-8 is dominated by float
    cancellation; the caller judges the returned magnitude.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    work = net.astype(np.float64)
    x = np.asarray(x, dtype=np.float64)
    out, cache = forward(work, x)
    _, dout = loss(out)
    analytic, _ = backward(work, cache, dout)
    params = work.params()
    coords = [(i, idx) for i, p in enumerate(params) for idx in np.ndindex(p.shape)]
    rng = np.random.Generator(np.random.PCG64(seed))
    if n_samples is not None and n_samples < len(coords):
        picks = rng.choice(len(coords), size=n_samples, replace=False)
        coords = [coords[i] for i in picks]

    def relu_pattern(c):
        return [
            cp > 0
            for cp, layer in zip(c["pres"], work.layers)
            if layer.activation == "relu"
        ]

    max_err = 0.0
    for i, idx in coords:
        orig = params[i][idx]
        params[i][idx] = orig + h
        out_p, cache_p = forward(work, x)
        lp, _ = loss(out_p)
        params[i][idx] = orig - h
        out_m, cache_m = forward(work, x)
        lm, _ = loss(out_m)
        params[i][idx] = orig
        flipped = any(
            not np.array_equal(a, b)
            for a, b in zip(relu_pattern(cache_p), relu_pattern(cache_m))
        )
        if flipped:
            continue
        fd = (lp - lm) / (2 * h)
        ana = analytic[i][idx]
        denom = max(abs(fd), abs(ana), 1e-8)
        max_err = max(max_err, abs(fd - ana) / denom)
    return max_err
