"""MLP forward/backward, Adam, and the parameter blob format."""

import numpy as np
import pytest

from minimax_exploiter.errors import (DimensionMismatchError,
                                      FormatVersionMismatchError,
                                      NonFiniteGradientError)
from minimax_exploiter.neural import (AdamState, MlpSpec, adam_step, backward,
                                      forward, init_params, params_from_bytes,
                                      params_to_bytes, unpack)

from oracles import adam_reference


def test_spec_counts_params():
    spec = MlpSpec(3, (5, 4), 2)
    assert spec.layer_dims == ((3, 5), (5, 4), (4, 2))
    assert spec.num_params == (3 * 5 + 5) + (5 * 4 + 4) + (4 * 2 + 2)


def test_spec_rejects_empty_layers():
    with pytest.raises(DimensionMismatchError):
        MlpSpec(3, (0,), 2)


def test_unpack_returns_views(rng):
    spec = MlpSpec(3, (4,), 2)
    params = init_params(spec, rng)
    (w0, b0), (w1, b1) = unpack(spec, params)
    assert w0.shape == (3, 4) and b0.shape == (4,)
    assert w1.shape == (4, 2) and b1.shape == (2,)
    w0[0, 0] = 123.0
    assert params[0] == 123.0  # shared storage


def test_init_shapes_and_zero_biases(rng):
    spec = MlpSpec(10, (7,), 3)
    params = init_params(spec, rng)
    assert params.shape == (spec.num_params,)
    (_, b0), (_, b1) = unpack(spec, params)
    assert np.all(b0 == 0) and np.all(b1 == 0)


def test_forward_single_matches_batch(rng):
    spec = MlpSpec(6, (8, 8), 4)
    params = init_params(spec, rng)
    batch = rng.normal(size=(5, 6))
    out = forward(spec, params, batch)
    assert out.shape == (5, 4)
    for i in range(5):
        np.testing.assert_allclose(forward(spec, params, batch[i]), out[i])


def test_forward_rejects_wrong_width(rng):
    spec = MlpSpec(6, (8,), 4)
    params = init_params(spec, rng)
    with pytest.raises(DimensionMismatchError):
        forward(spec, params, np.zeros(7))


def fd_instance(seed, spec, batch=8, kink_margin=1e-3):
    """Random (params, states, actions, targets), or None when some ReLU
    pre-activation sits too close to zero for a central difference to stay
    on one linear piece."""
    rng = np.random.default_rng(seed)
    params = init_params(spec, rng)
    states = rng.normal(size=(batch, spec.input_dim))
    actions = rng.integers(0, spec.output_dim, size=batch)
    targets = rng.normal(size=batch) * 2
    from minimax_exploiter.neural import unpack
    z = states
    for i, (w, b) in enumerate(unpack(spec, params)):
        z = z @ w + b
        if i < len(spec.hidden_dims) and np.abs(z).min() < kink_margin:
            return None
        z = np.maximum(z, 0.0)
    return params, states, actions, targets


@pytest.mark.parametrize("loss", ["mse", "huber"])
def test_gradient_matches_finite_differences(loss):
    h = 1e-5
    spec = MlpSpec(4, (6, 5), 3)
    checked = 0
    seed = 0
    while checked < 5:
        seed += 1
        instance = fd_instance(seed, spec)
        if instance is None:
            continue
        params, states, actions, targets = instance
        checked += 1

        def loss_at(p):
            value, _ = backward(spec, p, states, actions, targets, loss=loss)
            return value

        _, grad = backward(spec, params, states, actions, targets, loss=loss)
        rng = np.random.default_rng(seed)
        idx = rng.choice(spec.num_params, size=25, replace=False)
        for i in idx:
            hi, lo = params.copy(), params.copy()
            hi[i] += h
            lo[i] -= h
            fd = (loss_at(hi) - loss_at(lo)) / (2 * h)
            assert abs(fd - grad[i]) <= 1e-4 * max(abs(fd), abs(grad[i]), 1e-8)


def test_backward_only_touches_selected_actions(rng):
    # outputs never selected by any batch row must receive zero gradient
    spec = MlpSpec(3, (), 4)  # linear map: easy to localize
    params = init_params(spec, rng)
    states = rng.normal(size=(6, 3))
    actions = np.zeros(6, dtype=np.int64)  # only action 0 selected
    _, grad = backward(spec, params, states, actions, np.ones(6))
    w_grad = grad[:12].reshape(3, 4)
    assert np.all(w_grad[:, 1:] == 0)
    assert np.any(w_grad[:, 0] != 0)


def test_adam_matches_reference_sequence(rng):
    params = rng.normal(size=20)
    grads = [rng.normal(size=20) for _ in range(50)]
    state = AdamState(learning_rate=0.01)
    theta = params.copy()
    for g in grads:
        theta = adam_step(theta, g, state)
    np.testing.assert_allclose(theta, adam_reference(params, grads, 0.01),
                               rtol=1e-12, atol=1e-12)


def test_adam_descends_a_scalar_bowl():
    # minimizing (w - 3)^2 from w=0 should settle near 3
    state = AdamState(learning_rate=0.05)
    w = np.array([0.0])
    for _ in range(2000):
        w = adam_step(w, 2 * (w - 3.0), state)
    assert abs(w[0] - 3.0) < 1e-3


def test_adam_rejects_nonfinite_gradient():
    state = AdamState()
    with pytest.raises(NonFiniteGradientError):
        adam_step(np.zeros(3), np.array([0.0, np.nan, 0.0]), state)


def test_param_blob_roundtrip(rng):
    spec = MlpSpec(5, (6,), 2)
    params = init_params(spec, rng)
    blob = params_to_bytes(spec, params, {"note": "fixture"})
    spec2, params2, meta = params_from_bytes(blob)
    assert spec2 == spec
    assert meta == {"note": "fixture"}
    np.testing.assert_array_equal(params, params2)


def test_param_blob_rejects_corruption(rng):
    spec = MlpSpec(5, (6,), 2)
    blob = params_to_bytes(spec, init_params(spec, rng))
    with pytest.raises(FormatVersionMismatchError):
        params_from_bytes(b"XXXX" + blob[4:])  # bad magic
    with pytest.raises(FormatVersionMismatchError):
        params_from_bytes(blob[:-8])  # truncated body
    with pytest.raises(FormatVersionMismatchError):
        params_from_bytes(blob.replace(b'"format_version": 1',
                                       b'"format_version": 9'))
