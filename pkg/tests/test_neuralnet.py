"""Dense-network engine: init, forward, backprop against finite differences, Adam."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vecbalance import neuralnet
from vecbalance.neuralnet import (
    DenseLayer,
    Network,
    adam_init,
    adam_step,
    backward,
    forward,
    gradient_check,
    init_network,
    sigmoid,
)


def sum_squares_loss(target):
    def loss(out):
        diff = np.asarray(out, dtype=np.float64) - target
        return float(np.sum(diff * diff)), 2 * diff
    return loss


# --------------------------------------------------------------------- init


def test_init_glorot_bounds_and_zero_biases():
    net = init_network([10, 7, 3], ["relu", "identity"], seed=0)
    for layer in net.layers:
        bound = np.sqrt(6.0 / (layer.in_dim + layer.out_dim))
        assert np.all(np.abs(layer.weights) <= bound)
        assert np.all(layer.biases == 0)
        assert layer.weights.dtype == np.float32


def test_init_deterministic():
    a = init_network([4, 5, 2], ["relu", "identity"], seed=3)
    b = init_network([4, 5, 2], ["relu", "identity"], seed=3)
    for la, lb in zip(a.layers, b.layers):
        assert np.array_equal(la.weights, lb.weights)


def test_init_validation():
    with pytest.raises(ValueError):
        init_network([4], ["identity"], seed=0)
    with pytest.raises(ValueError):
        init_network([4, 0], ["identity"], seed=0)
    with pytest.raises(ValueError):
        init_network([4, 2], ["relu", "identity"], seed=0)
    with pytest.raises(ValueError):
        init_network([4, 2], ["softmax"], seed=0)


def test_network_rejects_incompatible_layers():
    with pytest.raises(ValueError):
        Network([
            DenseLayer(np.zeros((3, 2), dtype=np.float32), np.zeros(3, dtype=np.float32), "relu"),
            DenseLayer(np.zeros((2, 4), dtype=np.float32), np.zeros(2, dtype=np.float32), "identity"),
        ])


# ------------------------------------------------------------------ forward


def test_forward_hand_case():
    net = Network([
        DenseLayer(np.array([[1.0, 2.0]], dtype=np.float32),
                   np.array([3.0], dtype=np.float32), "identity")
    ])
    out, _ = forward(net, np.array([1.0, 1.0], dtype=np.float32))
    assert out.shape == (1,)
    assert out[0] == pytest.approx(6.0)


def test_forward_relu_clips_negatives():
    net = Network([
        DenseLayer(np.eye(2, dtype=np.float32), np.zeros(2, dtype=np.float32), "relu")
    ])
    out, _ = forward(net, np.array([-1.0, 2.0]))
    assert out.tolist() == [0.0, 2.0]


def test_forward_batch_matches_single_rows():
    net = init_network([5, 8, 3], ["relu", "identity"], seed=1)
    rng = np.random.Generator(np.random.PCG64(2))
    batch = rng.normal(size=(6, 5)).astype(np.float32)
    batch_out, _ = forward(net, batch)
    for i in range(6):
        single_out, _ = forward(net, batch[i])
        assert np.allclose(batch_out[i], single_out, atol=1e-6)


def test_forward_rejects_wrong_width_and_nonfinite():
    net = init_network([4, 2], ["identity"], seed=0)
    with pytest.raises(ValueError):
        forward(net, np.zeros(5))
    with pytest.raises(ValueError):
        forward(net, np.array([1.0, np.nan, 0.0, 0.0]))


def test_sigmoid_extremes_finite():
    vals = sigmoid(np.array([-1000.0, 0.0, 1000.0]))
    assert vals[0] == 0.0
    assert vals[1] == 0.5
    assert vals[2] == 1.0


# ----------------------------------------------------------------- backward


def test_gradient_check_linear_network():
    net = init_network([6, 4, 3], ["identity", "identity"], seed=5)
    target = np.random.Generator(np.random.PCG64(6)).normal(size=3)
    x = np.random.Generator(np.random.PCG64(7)).normal(size=6)
    err = gradient_check(net, sum_squares_loss(target), x)
    assert err < 1e-6


def test_gradient_check_relu_network():
    net = init_network([6, 8, 3], ["relu", "identity"], seed=8)
    target = np.random.Generator(np.random.PCG64(9)).normal(size=3)
    x = np.random.Generator(np.random.PCG64(10)).normal(size=6)
    err = gradient_check(net, sum_squares_loss(target), x, h=1e-6)
    assert err < 1e-4


def test_gradient_check_sigmoid_head():
    net = init_network([4, 5, 2], ["relu", "sigmoid"], seed=11)
    target = np.array([0.3, 0.8])
    x = np.random.Generator(np.random.PCG64(12)).normal(size=4)
    err = gradient_check(net, sum_squares_loss(target), x, h=1e-6)
    assert err < 1e-4


def test_gradient_check_batched_input():
    net = init_network([5, 6, 2], ["relu", "identity"], seed=13)
    rng = np.random.Generator(np.random.PCG64(14))
    x = rng.normal(size=(7, 5))
    target = rng.normal(size=(7, 2))
    err = gradient_check(net, sum_squares_loss(target), x, h=1e-6, n_samples=60, seed=1)
    assert err < 1e-4


def test_backward_shape_validation():
    net = init_network([3, 2], ["identity"], seed=0)
    _, cache = forward(net, np.zeros(3))
    with pytest.raises(ValueError):
        backward(net, cache, np.zeros(5))


def test_backward_input_gradient_linear_case():
    # single identity layer: d(sum(out))/dx == column sums of W
    w = np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]], dtype=np.float32)
    net = Network([DenseLayer(w, np.zeros(2, dtype=np.float32), "identity")])
    _, cache = forward(net, np.ones(3, dtype=np.float32))
    _, dx = backward(net, cache, np.ones(2))
    assert np.allclose(dx, w.sum(axis=0))


# --------------------------------------------------------------------- adam


def test_adam_first_step_direction():
    p = np.array([1.0, 1.0], dtype=np.float64)
    g = np.array([0.5, -2.0])
    state = adam_init([p], learning_rate=0.1)
    adam_step([p], [g], state)
    # bias-corrected first step is ~lr * sign(gradient)
    assert np.allclose(p, [1.0 - 0.1, 1.0 + 0.1], atol=1e-6)
    assert state.step_count == 1


def test_adam_updates_in_place_and_counts():
    net = init_network([3, 2], ["identity"], seed=1)
    params = net.params()
    before = [p.copy() for p in params]
    state = adam_init(params)
    grads = [np.ones_like(p) for p in params]
    adam_step(params, grads, state)
    adam_step(params, grads, state)
    assert state.step_count == 2
    for p, b in zip(net.params(), before):
        assert not np.array_equal(p, b)


def test_adam_validates_shapes():
    p = np.zeros(3)
    state = adam_init([p])
    with pytest.raises(ValueError):
        adam_step([p], [np.zeros(4)], state)
    with pytest.raises(ValueError):
        adam_step([p, p], [np.zeros(3)], state)


def test_adam_deterministic():
    def run():
        net = init_network([4, 3], ["identity"], seed=2)
        params = net.params()
        state = adam_init(params, learning_rate=0.05)
        rng = np.random.Generator(np.random.PCG64(3))
        for _ in range(10):
            grads = [rng.normal(size=p.shape).astype(np.float32) for p in params]
            adam_step(params, grads, state)
        return [p.copy() for p in params]

    for a, b in zip(run(), run()):
        assert np.array_equal(a, b)


# --------------------------------------------------------------- properties


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=2**31 - 1))
def test_forward_finite_on_finite_inputs(seed):
    rng = np.random.Generator(np.random.PCG64(seed))
    net = init_network([4, 6, 2], ["relu", "identity"], seed=seed % 1000)
    out, _ = forward(net, rng.normal(size=4).astype(np.float32) * 10)
    assert np.isfinite(out).all()


@settings(max_examples=20, deadline=None)
@given(st.integers(min_value=0, max_value=2**31 - 1))
def test_astype_preserves_values(seed):
    net = init_network([3, 5, 2], ["relu", "identity"], seed=seed % 997)
    wide = net.astype(np.float64)
    x = np.random.Generator(np.random.PCG64(seed)).normal(size=3).astype(np.float32)
    out32, _ = forward(net, x)
    out64, _ = forward(wide, x.astype(np.float64))
    assert np.allclose(out32, out64, atol=1e-5)
