"""Bona fide / spoof decision heads: logistic regression or a small MLP.

Class index 0 is bona fide and 1 is spoof. A score is the bona fide logit
minus the spoof logit, so higher means more likely genuine.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import EmptyTrainingSet, ShapeMismatch, SingleClassData
from .tensorcore import (
    AdamState,
    Params,
    adam_step,
    batch_order,
    glorot_uniform,
    linear_backward,
    relu,
    xent_softmax,
)

BONA_FIDE = 0
SPOOF = 1
VARIANTS = ("logistic", "mlp")
MLP_HIDDEN = 64


@dataclass(frozen=True)
class ScoreRecord:
    utt_id: str
    score: float
    label: int  # BONA_FIDE or SPOOF


@dataclass
class HeadParams:
    variant: str
    tensors: Params

    @property
    def in_dim(self) -> int:
        key = "out.w" if self.variant == "logistic" else "hid.w"
        return self.tensors[key].shape[0]


def init_head(variant: str, seed: int, in_dim: int = 128, hidden: int = MLP_HIDDEN) -> HeadParams:
    if variant not in VARIANTS:
        raise ValueError(f"unknown head variant {variant!r}")
    rng = np.random.default_rng(seed)
    if variant == "logistic":
        tensors = {"out.w": glorot_uniform(rng, in_dim, 2), "out.b": np.zeros((1, 2))}
    else:
        tensors = {
            "hid.w": glorot_uniform(rng, in_dim, hidden),
            "hid.b": np.zeros((1, hidden)),
            "out.w": glorot_uniform(rng, hidden, 2),
            "out.b": np.zeros((1, 2)),
        }
    return HeadParams(variant, tensors)


def head_forward(params: HeadParams, x: np.ndarray):
    p = params.tensors
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != params.in_dim:
        raise ShapeMismatch(f"head expects (N, {params.in_dim}), got {x.shape}")
    if params.variant == "logistic":
        return x @ p["out.w"] + p["out.b"], (x, None)
    pre = x @ p["hid.w"] + p["hid.b"]
    hid = relu(pre)
    return hid @ p["out.w"] + p["out.b"], (x, pre)


def head_backward(params: HeadParams, dlogits: np.ndarray, cache) -> tuple[Params, np.ndarray]:
    """Returns (parameter gradients, gradient with respect to the input)."""
    p = params.tensors
    x, pre = cache
    if params.variant == "logistic":
        dx, dw, db = linear_backward(x, p["out.w"], dlogits)
        return {"out.w": dw, "out.b": db}, dx
    hid = relu(pre)
    dhid, dw2, db2 = linear_backward(hid, p["out.w"], dlogits)
    dpre = dhid * (pre > 0)
    dx, dw1, db1 = linear_backward(x, p["hid.w"], dpre)
    return {"hid.w": dw1, "hid.b": db1, "out.w": dw2, "out.b": db2}, dx


def score(features: np.ndarray, params: HeadParams) -> np.ndarray:
    logits, _ = head_forward(params, np.atleast_2d(features))
    return logits[:, BONA_FIDE] - logits[:, SPOOF]


def predict(features: np.ndarray, params: HeadParams) -> np.ndarray:
    return np.where(score(features, params) > 0, BONA_FIDE, SPOOF)


def check_labels(labels: np.ndarray) -> None:
    if labels.size == 0:
        raise EmptyTrainingSet("no training examples")
    if not (np.any(labels == BONA_FIDE) and np.any(labels == SPOOF)):
        raise SingleClassData("training data must contain both classes")


def train_head(features, labels: Sequence[int], variant: str = "mlp", seed: int = 0,
               epochs: int = 50, batch_size: int = 32, lr: float = 1e-4,
               weight_decay: float = 1e-3, init: Optional[HeadParams] = None) -> HeadParams:
    """Minibatch Adam on softmax cross-entropy; deterministic given ``seed``."""
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    check_labels(y)
    rng = np.random.default_rng(seed)
    params = init or init_head(variant, int(rng.integers(2**63)), in_dim=x.shape[1])
    state = AdamState(lr=lr, weight_decay=weight_decay)
    for _ in range(epochs):
        for idx in batch_order(rng, len(y), batch_size):
            logits, cache = head_forward(params, x[idx])
            _, dlogits = xent_softmax(logits, y[idx])
            grads, _ = head_backward(params, dlogits, cache)
            adam_step(params.tensors, grads, state)
    return params
