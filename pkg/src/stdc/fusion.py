"""Spectra-temporal fusion: z-scoring of concat(SDC, STC) and an autoencoder
whose 128-D bottleneck is the STDC representation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import EmptyTrainingSet, ShapeMismatch, StatsNotFitted, TooFewVectors
from .tensorcore import (
    AdamState,
    Params,
    adam_step,
    batch_order,
    glorot_uniform,
    linear_backward,
    relu,
)

STD_FLOOR = 1e-6
AE_DIMS = (256, 192, 128)
LAYERS = ("enc1", "enc2", "dec1", "dec2")


@dataclass(frozen=True)
class NormStats:
    mean: np.ndarray
    std: np.ndarray

    def to_tensors(self) -> Params:
        return {"norm.mean": self.mean[None, :], "norm.std": self.std[None, :]}

    @classmethod
    def from_tensors(cls, tensors: Params) -> "NormStats":
        return cls(tensors["norm.mean"][0].copy(), tensors["norm.std"][0].copy())


def fit_norm(vectors) -> NormStats:
    """Per-dimension mean and population std, std floored at 1e-6."""
    x = np.asarray(vectors, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise TooFewVectors("need at least two vectors to fit normalisation")
    return NormStats(x.mean(axis=0), np.maximum(x.std(axis=0), STD_FLOOR))


def normalize(x, stats: Optional[NormStats]) -> np.ndarray:
    if stats is None:
        raise StatsNotFitted("normalisation statistics have not been fitted")
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != stats.mean.size:
        raise ShapeMismatch(f"vector width {x.shape[-1]} != {stats.mean.size}")
    return (x - stats.mean) / stats.std


def denormalize(z, stats: NormStats) -> np.ndarray:
    return np.asarray(z) * stats.std + stats.mean


# ---------------------------------------------------------------- autoencoder


def init_autoencoder(seed: int, dims=AE_DIMS) -> Params:
    """Encoder d0 -> d1 (relu) -> d2 (linear); decoder mirrors it."""
    d0, d1, d2 = dims
    rng = np.random.default_rng(seed)
    shapes = {"enc1": (d0, d1), "enc2": (d1, d2), "dec1": (d2, d1), "dec2": (d1, d0)}
    params: Params = {}
    for name in LAYERS:
        fan_in, fan_out = shapes[name]
        params[f"{name}.w"] = glorot_uniform(rng, fan_in, fan_out)
        params[f"{name}.b"] = np.zeros((1, fan_out))
    return params


def encode(params: Params, x: np.ndarray) -> np.ndarray:
    hid = relu(x @ params["enc1.w"] + params["enc1.b"])
    return hid @ params["enc2.w"] + params["enc2.b"]


def ae_forward(params: Params, x: np.ndarray):
    """Returns (code, reconstruction, cache)."""
    p = params
    pre1 = x @ p["enc1.w"] + p["enc1.b"]
    h1 = relu(pre1)
    code = h1 @ p["enc2.w"] + p["enc2.b"]
    pre2 = code @ p["dec1.w"] + p["dec1.b"]
    h2 = relu(pre2)
    recon = h2 @ p["dec2.w"] + p["dec2.b"]
    return code, recon, (x, pre1, h1, code, pre2, h2)


def reconstruction_loss(params: Params, x: np.ndarray) -> float:
    _, recon, _ = ae_forward(params, x)
    return float(np.mean((recon - x) ** 2))


def ae_loss_and_grads(params: Params, x: np.ndarray) -> tuple[float, Params]:
    """Mean squared reconstruction error (over batch and dims) and gradients."""
    p = params
    _, recon, (x, pre1, h1, code, pre2, h2) = ae_forward(params, x)
    diff = recon - x
    loss = float(np.mean(diff ** 2))
    drecon = 2.0 * diff / diff.size
    dh2, g_dec2w, g_dec2b = linear_backward(h2, p["dec2.w"], drecon)
    dcode, g_dec1w, g_dec1b = linear_backward(code, p["dec1.w"], dh2 * (pre2 > 0))
    dh1, g_enc2w, g_enc2b = linear_backward(h1, p["enc2.w"], dcode)
    _, g_enc1w, g_enc1b = linear_backward(x, p["enc1.w"], dh1 * (pre1 > 0))
    grads = {
        "enc1.w": g_enc1w, "enc1.b": g_enc1b,
        "enc2.w": g_enc2w, "enc2.b": g_enc2b,
        "dec1.w": g_dec1w, "dec1.b": g_dec1b,
        "dec2.w": g_dec2w, "dec2.b": g_dec2b,
    }
    return loss, grads


def train_autoencoder(train_vectors, params: Params, seed: int, epochs: int = 50,
                      batch_size: int = 32, lr: float = 1e-4, weight_decay: float = 1e-3,
                      history: Optional[list] = None) -> Params:
    """Fit on already-normalised vectors. ``params`` is updated in place and
    returned. Pass a list as ``history`` to collect the loss over the full
    set before training and after every epoch."""
    x = np.asarray(train_vectors, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise EmptyTrainingSet("no vectors to train the autoencoder on")
    rng = np.random.default_rng(seed)
    state = AdamState(lr=lr, weight_decay=weight_decay)
    if history is not None:
        history.append(reconstruction_loss(params, x))
    for _ in range(epochs):
        for idx in batch_order(rng, x.shape[0], batch_size):
            _, grads = ae_loss_and_grads(params, x[idx])
            adam_step(params, grads, state)
        if history is not None:
            history.append(reconstruction_loss(params, x))
    return params


def encode_stdc(sdc: np.ndarray, stc: np.ndarray, stats: Optional[NormStats],
                params: Params) -> np.ndarray:
    """128-D STDC vector from one SDC/STC pair, or (N, 128) from stacked rows."""
    single = np.ndim(sdc) == 1
    z = normalize(np.concatenate([np.atleast_2d(sdc), np.atleast_2d(stc)], axis=1), stats)
    code = encode(params, z)
    return code[0] if single else code
