"""Minimal ReLU MLP with flat parameter storage, TD-regression backprop and
Adam. All math is in 64-bit floats for reproducibility; networks at this
scale do not need more machinery than numpy.

Parameters live in one flat vector laid out layer by layer as
``W (in*out, row-major) then b (out)``, which keeps finite-difference
checking, Adam and serialization trivial.
"""

from __future__ import annotations

import io
import json
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import (DimensionMismatchError, FormatVersionMismatchError,
                     NonFiniteGradientError)

PARAMS_MAGIC = b"MMXP"
PARAMS_VERSION = 1


@dataclass(frozen=True)
class MlpSpec:
    input_dim: int
    hidden_dims: tuple[int, ...]
    output_dim: int

    def __post_init__(self):
        dims = (self.input_dim, *self.hidden_dims, self.output_dim)
        if any(d < 1 for d in dims):
            raise DimensionMismatchError(f"all dims must be >= 1, got {dims}")

    @property
    def layer_dims(self) -> tuple[tuple[int, int], ...]:
        dims = (self.input_dim, *self.hidden_dims, self.output_dim)
        return tuple(zip(dims[:-1], dims[1:]))

    @property
    def num_params(self) -> int:
        return sum(i * o + o for i, o in self.layer_dims)


def init_params(spec: MlpSpec, rng: np.random.Generator) -> np.ndarray:
    """He-uniform weights for ReLU layers, zero biases."""
    chunks = []
    for fan_in, fan_out in spec.layer_dims:
        limit = np.sqrt(6.0 / fan_in)
        chunks.append(rng.uniform(-limit, limit, size=fan_in * fan_out))
        chunks.append(np.zeros(fan_out))
    return np.concatenate(chunks)


def unpack(spec: MlpSpec, params: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
    """Views (W, b) per layer into the flat vector."""
    if params.shape != (spec.num_params,):
        raise DimensionMismatchError(
            f"expected {spec.num_params} params, got {params.shape}")
    layers = []
    offset = 0
    for fan_in, fan_out in spec.layer_dims:
        w = params[offset:offset + fan_in * fan_out].reshape(fan_in, fan_out)
        offset += fan_in * fan_out
        b = params[offset:offset + fan_out]
        offset += fan_out
        layers.append((w, b))
    return layers


def _forward_cached(spec: MlpSpec, params: np.ndarray, states: np.ndarray):
    layers = unpack(spec, params)
    activations = [states]
    z = states
    for idx, (w, b) in enumerate(layers):
        z = z @ w + b
        if idx < len(layers) - 1:
            z = np.maximum(z, 0.0)
        activations.append(z)
    return activations


def forward(spec: MlpSpec, params: np.ndarray, state: np.ndarray) -> np.ndarray:
    """Q-values for one state (1-D input) or a batch (2-D input)."""
    x = np.asarray(state, dtype=np.float64)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.shape[1] != spec.input_dim:
        raise DimensionMismatchError(
            f"input dim {x.shape[1]} != spec {spec.input_dim}")
    out = _forward_cached(spec, params, x)[-1]
    return out[0] if single else out


def backward(spec: MlpSpec, params: np.ndarray, states: np.ndarray,
             actions: np.ndarray, targets: np.ndarray,
             loss: str = "mse", huber_delta: float = 1.0):
    """Gradient of the mean TD loss taken at the selected action outputs.

    Returns ``(loss_value, grad)`` with ``grad`` shaped like ``params``.
    """
    states = np.asarray(states, dtype=np.float64)
    if states.ndim != 2 or states.shape[0] == 0:
        raise DimensionMismatchError("states must be a non-empty 2-D batch")
    if states.shape[1] != spec.input_dim:
        raise DimensionMismatchError(
            f"input dim {states.shape[1]} != spec {spec.input_dim}")
    actions = np.asarray(actions, dtype=np.int64)
    targets = np.asarray(targets, dtype=np.float64)
    n = states.shape[0]

    activations = _forward_cached(spec, params, states)
    q = activations[-1]
    err = q[np.arange(n), actions] - targets
    if loss == "mse":
        loss_value = float(np.mean(err ** 2))
        dsel = 2.0 * err / n
    elif loss == "huber":
        absd = np.abs(err)
        quad = np.minimum(absd, huber_delta)
        loss_value = float(np.mean(0.5 * quad ** 2
                                   + huber_delta * (absd - quad)))
        dsel = np.clip(err, -huber_delta, huber_delta) / n
    else:
        raise ValueError(f"unknown loss {loss!r}")

    dz = np.zeros_like(q)
    dz[np.arange(n), actions] = dsel

    layers = unpack(spec, params)
    grads: list[np.ndarray] = [None] * (2 * len(layers))  # type: ignore[list-item]
    for idx in range(len(layers) - 1, -1, -1):
        w, _b = layers[idx]
        a_prev = activations[idx]
        grads[2 * idx] = (a_prev.T @ dz).reshape(-1)
        grads[2 * idx + 1] = dz.sum(axis=0)
        if idx > 0:
            dz = (dz @ w.T) * (activations[idx] > 0.0)
    return loss_value, np.concatenate(grads)


@dataclass
class AdamState:
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: np.ndarray | None = None
    v: np.ndarray | None = None


def adam_step(params: np.ndarray, grad: np.ndarray,
              state: AdamState) -> np.ndarray:
    """One Adam update with standard bias correction; mutates ``state`` and
    returns the new parameter vector."""
    if not np.all(np.isfinite(grad)):
        raise NonFiniteGradientError("gradient contains NaN or inf")
    if params.shape != grad.shape:
        raise DimensionMismatchError("params/grad shape mismatch")
    if state.m is None:
        state.m = np.zeros_like(params)
        state.v = np.zeros_like(params)
    state.step += 1
    state.m = state.beta1 * state.m + (1 - state.beta1) * grad
    state.v = state.beta2 * state.v + (1 - state.beta2) * grad ** 2
    m_hat = state.m / (1 - state.beta1 ** state.step)
    v_hat = state.v / (1 - state.beta2 ** state.step)
    return params - state.learning_rate * m_hat / (np.sqrt(v_hat) + state.eps)


# -- checkpoint bytes: magic, version, json layout header, raw little-endian
#    float64 parameters --

def params_to_bytes(spec: MlpSpec, params: np.ndarray,
                    metadata: dict | None = None) -> bytes:
    header = {
        "format_version": PARAMS_VERSION,
        "input_dim": spec.input_dim,
        "hidden_dims": list(spec.hidden_dims),
        "output_dim": spec.output_dim,
        "metadata": metadata or {},
    }
    blob = json.dumps(header, sort_keys=True).encode()
    body = np.asarray(params, dtype="<f8").tobytes()
    return PARAMS_MAGIC + struct.pack("<I", len(blob)) + blob + body


def params_from_bytes(data: bytes):
    """Returns ``(spec, params, metadata)``; raises on truncation or an
    unknown version."""
    fh = io.BytesIO(data)
    magic = fh.read(4)
    if magic != PARAMS_MAGIC:
        raise FormatVersionMismatchError("bad magic; not a parameter blob")
    raw_len = fh.read(4)
    if len(raw_len) < 4:
        raise FormatVersionMismatchError("truncated header")
    (blob_len,) = struct.unpack("<I", raw_len)
    blob = fh.read(blob_len)
    if len(blob) < blob_len:
        raise FormatVersionMismatchError("truncated header")
    header = json.loads(blob.decode())
    if header.get("format_version") != PARAMS_VERSION:
        raise FormatVersionMismatchError(
            f"unsupported format version {header.get('format_version')}")
    spec = MlpSpec(header["input_dim"], tuple(header["hidden_dims"]),
                   header["output_dim"])
    body = fh.read()
    if len(body) != spec.num_params * 8:
        raise FormatVersionMismatchError("truncated parameter body")
    params = np.frombuffer(body, dtype="<f8").astype(np.float64)
    return spec, params, header["metadata"]
