"""Sequential Temporal Coefficients: a 2-layer bidirectional LSTM.

Each log-Mel frame is one timestep. The utterance vector is the last forward
state of layer 2 concatenated with the first backward state of layer 2.

Batches are time-major, ``xs`` shaped (T, B, D) with a 0/1 ``mask`` (T, B).
On masked steps a direction carries its state through unchanged, so padded
tails never leak into either summary state.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import EmptySequence, ShapeMismatch
from .melspec import SpectrogramMatrix
from .tensorcore import Params, glorot_uniform, sigmoid

N_LAYERS = 2
DIRECTIONS = ("fwd", "bwd")
HIDDEN = 64
INPUT_SIZE = 128
MAX_FRAMES = 256


@dataclass
class BiLstmParams:
    tensors: Params

    @property
    def input_size(self) -> int:
        return self.tensors["l0.fwd.wx"].shape[0]

    @property
    def hidden(self) -> int:
        return self.tensors["l0.fwd.wh"].shape[0]

    @property
    def output_size(self) -> int:
        return 2 * self.hidden

    def weights(self, layer: int, direction: str):
        p = self.tensors
        key = f"l{layer}.{direction}"
        return p[f"{key}.wx"], p[f"{key}.wh"], p[f"{key}.b"]

    def trainable(self) -> Params:
        return {k: v for k, v in self.tensors.items() if not k.startswith("in.")}


def init_bilstm(seed: int, input_size: int = INPUT_SIZE, hidden: int = HIDDEN) -> BiLstmParams:
    rng = np.random.default_rng(seed)
    tensors: Params = {}
    for layer in range(N_LAYERS):
        fan_in = input_size if layer == 0 else 2 * hidden
        for d in DIRECTIONS:
            key = f"l{layer}.{d}"
            # gate blocks are laid out [input, forget, output, candidate]
            tensors[f"{key}.wx"] = glorot_uniform(rng, fan_in, 4 * hidden)
            tensors[f"{key}.wh"] = glorot_uniform(rng, hidden, 4 * hidden)
            tensors[f"{key}.b"] = np.zeros((1, 4 * hidden))
    tensors["in.mean"] = np.zeros((1, input_size))
    tensors["in.std"] = np.ones((1, input_size))
    return BiLstmParams(tensors)


def set_input_stats(params: BiLstmParams, frames: np.ndarray, floor: float = 1e-6) -> None:
    """Fix the input standardisation from training frames (N, D).

    One mean and one std shared by all bands, so quiet bands stay quiet
    instead of having their noise scaled up to unit variance.
    """
    width = params.input_size
    params.tensors["in.mean"] = np.full((1, width), frames.mean())
    params.tensors["in.std"] = np.full((1, width), max(float(frames.std()), floor))


# ---------------------------------------------------------------- cell


def lstm_cell(x, h, c, wx, wh, b):
    """One LSTM step. Returns (h_new, c_new, cache)."""
    if x.shape[1] != wx.shape[0] or h.shape[1] != wh.shape[0] or h.shape != c.shape:
        raise ShapeMismatch(f"cell shapes x{x.shape} h{h.shape} c{c.shape} wx{wx.shape}")
    n = h.shape[1]
    z = x @ wx + h @ wh + b
    i = sigmoid(z[:, :n])
    f = sigmoid(z[:, n:2 * n])
    o = sigmoid(z[:, 2 * n:3 * n])
    g = np.tanh(z[:, 3 * n:])
    c_new = f * c + i * g
    tc = np.tanh(c_new)
    h_new = o * tc
    return h_new, c_new, (x, h, c, i, f, o, g, tc)


def lstm_cell_backward(dh, dc, cache, wx, wh):
    """Backward of :func:`lstm_cell`.

    Returns (dx, dh_prev, dc_prev, dwx, dwh, db).
    """
    x, h, c, i, f, o, g, tc = cache
    dc = dc + dh * o * (1.0 - tc * tc)
    dz = np.concatenate([
        dc * g * i * (1.0 - i),
        dc * c * f * (1.0 - f),
        dh * tc * o * (1.0 - o),
        dc * i * (1.0 - g * g),
    ], axis=1)
    return dz @ wx.T, dz @ wh.T, dc * f, x.T @ dz, h.T @ dz, dz.sum(axis=0, keepdims=True)


# ---------------------------------------------------------------- sequences


def _run_direction(xs, mask, wx, wh, b, reverse):
    steps, batch, _ = xs.shape
    n = wh.shape[0]
    h = np.zeros((batch, n))
    c = np.zeros((batch, n))
    hs = np.zeros((steps, batch, n))
    caches = [None] * steps
    order = range(steps - 1, -1, -1) if reverse else range(steps)
    for t in order:
        m = mask[t][:, None]
        h_new, c_new, cache = lstm_cell(xs[t], h, c, wx, wh, b)
        h = m * h_new + (1.0 - m) * h
        c = m * c_new + (1.0 - m) * c
        hs[t] = h
        caches[t] = cache
    return hs, caches


def _direction_backward(dhs, mask, caches, wx, wh, reverse):
    steps, batch, n = dhs.shape
    dxs = np.zeros((steps, batch, wx.shape[0]))
    dwx = np.zeros_like(wx)
    dwh = np.zeros_like(wh)
    db = np.zeros((1, wh.shape[1]))
    dh_carry = np.zeros((batch, n))
    dc_carry = np.zeros((batch, n))
    # walk against the direction of processing
    order = range(steps) if reverse else range(steps - 1, -1, -1)
    for t in order:
        m = mask[t][:, None]
        dh = dhs[t] + dh_carry
        dc = dc_carry
        dx, dh_prev, dc_prev, gwx, gwh, gb = lstm_cell_backward(m * dh, m * dc, caches[t], wx, wh)
        dxs[t] = dx
        dwx += gwx
        dwh += gwh
        db += gb
        dh_carry = dh_prev + (1.0 - m) * dh
        dc_carry = dc_prev + (1.0 - m) * dc
    return dxs, dwx, dwh, db


def bilstm_forward(params: BiLstmParams, xs: np.ndarray, mask: np.ndarray):
    """Run both layers; returns (summary (B, 2H), cache)."""
    if xs.ndim != 3 or xs.shape[0] == 0:
        raise EmptySequence("need at least one timestep")
    if xs.shape[2] != params.input_size:
        raise ShapeMismatch(f"input width {xs.shape[2]} != {params.input_size}")
    if np.any(mask.sum(axis=0) == 0):
        raise EmptySequence("a sequence in the batch has no valid frames")
    layer_in = xs
    cache = []
    for layer in range(N_LAYERS):
        outs = []
        dir_caches = []
        for d in DIRECTIONS:
            hs, caches = _run_direction(layer_in, mask, *params.weights(layer, d), reverse=(d == "bwd"))
            outs.append(hs)
            dir_caches.append(caches)
        cache.append(dir_caches)
        layer_in = np.concatenate(outs, axis=2)
    n = params.hidden
    summary = np.concatenate([layer_in[-1, :, :n], layer_in[0, :, n:]], axis=1)
    return summary, (mask, cache, xs.shape)


def bilstm_backward(params: BiLstmParams, dsummary: np.ndarray, cache) -> tuple[Params, np.ndarray]:
    """Gradients for every trainable tensor, plus d(inputs)."""
    mask, layer_caches, shape = cache
    steps, batch, _ = shape
    n = params.hidden
    grads: Params = {}
    d_out = np.zeros((steps, batch, 2 * n))
    d_out[-1, :, :n] = dsummary[:, :n]
    d_out[0, :, n:] += dsummary[:, n:]
    for layer in range(N_LAYERS - 1, -1, -1):
        d_in = None
        for k, d in enumerate(DIRECTIONS):
            wx, wh, _ = params.weights(layer, d)
            dxs, dwx, dwh, db = _direction_backward(
                d_out[:, :, k * n:(k + 1) * n], mask, layer_caches[layer][k], wx, wh,
                reverse=(d == "bwd"))
            key = f"l{layer}.{d}"
            grads[f"{key}.wx"] = dwx
            grads[f"{key}.wh"] = dwh
            grads[f"{key}.b"] = db
            d_in = dxs if d_in is None else d_in + dxs
        d_out = d_in
    return grads, d_out


# ---------------------------------------------------------------- features


def prepare_batch(specs: Sequence[SpectrogramMatrix], params: BiLstmParams,
                  max_frames: Optional[int] = MAX_FRAMES):
    """Stack spectrograms time-major, truncating/padding to a common length."""
    lengths = [s.frame_count if max_frames is None else min(s.frame_count, max_frames) for s in specs]
    if not specs or min(lengths) == 0:
        raise EmptySequence("every spectrogram needs at least one frame")
    steps = max(lengths)
    xs = np.zeros((steps, len(specs), params.input_size))
    mask = np.zeros((steps, len(specs)))
    mean, std = params.tensors["in.mean"], params.tensors["in.std"]
    for j, (s, n) in enumerate(zip(specs, lengths)):
        if s.n_mels != params.input_size:
            raise ShapeMismatch(f"{s.n_mels} mel bands, network expects {params.input_size}")
        xs[:n, j] = (s.values[:, :n].T - mean) / std
        mask[:n, j] = 1.0
    return xs, mask


def stc_batch(specs: Sequence[SpectrogramMatrix], params: BiLstmParams,
              max_frames: Optional[int] = MAX_FRAMES) -> np.ndarray:
    xs, mask = prepare_batch(specs, params, max_frames)
    summary, _ = bilstm_forward(params, xs, mask)
    return summary


def stc_features(spec: SpectrogramMatrix, params: BiLstmParams,
                 max_frames: Optional[int] = MAX_FRAMES) -> np.ndarray:
    """128-D temporal vector for one log-Mel spectrogram."""
    return stc_batch([spec], params, max_frames)[0]
