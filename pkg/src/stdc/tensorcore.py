"""Small dense-math substrate for the trainable stages.

Tensors are plain 2-D float64 numpy arrays (biases are 1 x n rows). A model
is an ordered ``dict[str, ndarray]``. Gradients are written by hand per
layer; there is no autodiff graph.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Sequence

import numpy as np

from .errors import BadContainer, BadLabel, ShapeMismatch

Params = Dict[str, np.ndarray]

CONTAINER_MAGIC = b"STDC"
CONTAINER_VERSION = 1


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeMismatch(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def glorot_uniform(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=(fan_in, fan_out))


def sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def xent_softmax(logits: np.ndarray, labels: Sequence[int]) -> tuple[float, np.ndarray]:
    """Mean softmax cross-entropy and its gradient with respect to ``logits``."""
    logits = np.asarray(logits, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    batch, n_classes = logits.shape
    if labels.shape != (batch,):
        raise ShapeMismatch(f"{labels.shape[0]} labels for {batch} rows")
    if labels.size and (labels.min() < 0 or labels.max() >= n_classes):
        raise BadLabel(f"labels must lie in [0, {n_classes})")
    z = logits - logits.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(z).sum(axis=1))
    rows = np.arange(batch)
    loss = float(np.mean(log_norm - z[rows, labels]))
    grad = softmax(logits)
    grad[rows, labels] -= 1.0
    return loss, grad / batch


def linear_backward(x: np.ndarray, w: np.ndarray, dout: np.ndarray):
    """Gradients of ``x @ w + b``: returns (dx, dw, db)."""
    return dout @ w.T, x.T @ dout, dout.sum(axis=0, keepdims=True)


# ---------------------------------------------------------------- Adam


@dataclass
class AdamState:
    lr: float = 1e-4
    weight_decay: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: Params = field(default_factory=dict)
    v: Params = field(default_factory=dict)


def adam_step(params: Params, grads: Params, state: AdamState) -> Params:
    """One AdamW update (decoupled weight decay), applied in place."""
    for name, g in grads.items():
        if name not in params or params[name].shape != g.shape:
            raise ShapeMismatch(f"gradient {name!r} does not match its parameter")
    state.step += 1
    t = state.step
    c1 = 1.0 - state.beta1 ** t
    c2 = 1.0 - state.beta2 ** t
    for name, g in grads.items():
        p = params[name]
        if name not in state.m:
            state.m[name] = np.zeros_like(p)
            state.v[name] = np.zeros_like(p)
        m, v = state.m[name], state.v[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        p -= state.lr * state.weight_decay * p
        p -= state.lr * (m / c1) / (np.sqrt(v / c2) + state.eps)
    return params


def batch_order(rng: np.random.Generator, n: int, batch_size: int) -> list[np.ndarray]:
    perm = rng.permutation(n)
    return [perm[i:i + batch_size] for i in range(0, n, batch_size)]


def round_to_float32(params: Params) -> Params:
    """Snap parameters to the precision they are stored with."""
    return {k: v.astype(np.float32).astype(np.float64) for k, v in params.items()}


# ---------------------------------------------------------------- container


def dumps_tensors(tensors: Params) -> bytes:
    """Serialise named 2-D tensors: magic, u16 version, then one record each."""
    out = [CONTAINER_MAGIC, struct.pack("<H", CONTAINER_VERSION)]
    for name, value in tensors.items():
        arr = np.asarray(value)
        if arr.ndim == 1:
            arr = arr[None, :]
        if arr.ndim != 2:
            raise ShapeMismatch(f"tensor {name!r} is not 2-D")
        encoded = name.encode("utf-8")
        out.append(struct.pack("<H", len(encoded)))
        out.append(encoded)
        out.append(struct.pack("<II", *arr.shape))
        out.append(np.ascontiguousarray(arr, dtype="<f4").tobytes())
    return b"".join(out)


def loads_tensors(data: bytes) -> Params:
    if data[:4] != CONTAINER_MAGIC:
        raise BadContainer("missing STDC magic")
    if len(data) < 6:
        raise BadContainer("truncated header")
    (version,) = struct.unpack("<H", data[4:6])
    if version != CONTAINER_VERSION:
        raise BadContainer(f"unsupported container version {version}")
    tensors: Params = {}
    pos = 6
    try:
        while pos < len(data):
            (n,) = struct.unpack_from("<H", data, pos)
            name = data[pos + 2:pos + 2 + n].decode("utf-8")
            pos += 2 + n
            rows, cols = struct.unpack_from("<II", data, pos)
            pos += 8
            size = rows * cols * 4
            if pos + size > len(data):
                raise BadContainer(f"tensor {name!r} truncated")
            arr = np.frombuffer(data[pos:pos + size], dtype="<f4").reshape(rows, cols)
            tensors[name] = arr.astype(np.float64)
            pos += size
    except struct.error as exc:
        raise BadContainer(f"truncated record: {exc}") from None
    return tensors


def save_tensors(path, tensors: Params) -> None:
    Path(path).write_bytes(dumps_tensors(tensors))


def load_tensors(path) -> Params:
    return loads_tensors(Path(path).read_bytes())
