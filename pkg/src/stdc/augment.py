"""Training-set augmentations: filtering, compression, shifts and reverb.

Every augmentation keeps the buffer length and ends with a hard clamp to
[-1, 1].
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.signal import fftconvolve, lfilter

from .audio_io import AudioBuffer
from .errors import BadHeader, BadParameter


class AugmentKind(str, enum.Enum):
    HIGHPASS = "highpass"
    LOWPASS = "lowpass"
    COMPRESS = "compress"
    TIME_SHIFT = "time_shift"
    PITCH_SHIFT = "pitch_shift"
    REVERB = "reverb"


# (param1, param2) defaults per kind
DEFAULTS = {
    AugmentKind.HIGHPASS: (300.0, 0.0),     # cutoff Hz
    AugmentKind.LOWPASS: (3400.0, 0.0),     # cutoff Hz
    AugmentKind.COMPRESS: (0.3, 4.0),       # threshold, ratio
    AugmentKind.TIME_SHIFT: (1600.0, 0.0),  # samples
    AugmentKind.PITCH_SHIFT: (2.0, 0.0),    # semitones
    AugmentKind.REVERB: (0.05, 0.01),       # decay constant s, pre-delay s
}


@dataclass(frozen=True)
class AugmentSpec:
    kind: AugmentKind
    param1: float = float("nan")
    param2: float = float("nan")
    seed: int = 0

    def params(self) -> tuple[float, float]:
        d1, d2 = DEFAULTS[self.kind]
        p1 = d1 if np.isnan(self.param1) else float(self.param1)
        p2 = d2 if np.isnan(self.param2) else float(self.param2)
        return p1, p2


def _rc(cutoff: float, sample_rate: int) -> tuple[float, float]:
    if not 0 < cutoff < sample_rate / 2:
        raise BadParameter(f"cutoff {cutoff} Hz outside (0, {sample_rate / 2})")
    return 1.0 / (2 * np.pi * cutoff), 1.0 / sample_rate


def highpass(x: np.ndarray, cutoff: float, sample_rate: int) -> np.ndarray:
    """y[n] = a (y[n-1] + x[n] - x[n-1]), a = RC / (RC + dt)."""
    rc, dt = _rc(cutoff, sample_rate)
    a = rc / (rc + dt)
    return lfilter([a, -a], [1.0, -a], x)


def lowpass(x: np.ndarray, cutoff: float, sample_rate: int) -> np.ndarray:
    """y[n] = y[n-1] + k (x[n] - y[n-1]), k = dt / (RC + dt)."""
    rc, dt = _rc(cutoff, sample_rate)
    k = dt / (rc + dt)
    return lfilter([k], [1.0, -(1.0 - k)], x)


def compress(x: np.ndarray, threshold: float, ratio: float) -> np.ndarray:
    """Static compressor: above ``threshold`` the gain is (|x|/T)^(1/R - 1)."""
    if not 0 < threshold <= 1 or ratio < 1:
        raise BadParameter(f"compress needs 0 < threshold <= 1 and ratio >= 1, got {threshold}, {ratio}")
    mag = np.abs(x)
    gain = np.ones_like(x)
    over = mag > threshold
    gain[over] = (mag[over] / threshold) ** (1.0 / ratio - 1.0)
    return x * gain


def time_shift(x: np.ndarray, shift: int) -> np.ndarray:
    return np.roll(x, int(shift))


def pitch_shift(x: np.ndarray, semitones: float) -> np.ndarray:
    """Naive resampling by 2^(semitones/12), trimmed or zero-padded back."""
    if abs(semitones) > 24:
        raise BadParameter(f"pitch shift of {semitones} semitones is out of range")
    factor = 2.0 ** (semitones / 12.0)
    n = x.size
    positions = np.arange(int(np.ceil(n / factor))) * factor
    positions = positions[positions <= n - 1]
    shifted = np.interp(positions, np.arange(n), x)
    out = np.zeros(n)
    m = min(n, shifted.size)
    out[:m] = shifted[:m]
    return out


def reverb_ir(sample_rate: int, decay: float, predelay: float, seed: int) -> np.ndarray:
    """Direct path followed by exponentially decaying Gaussian noise."""
    if decay <= 0 or predelay < 0:
        raise BadParameter(f"reverb needs decay > 0 and pre-delay >= 0, got {decay}, {predelay}")
    rng = np.random.default_rng(seed)
    start = int(round(predelay * sample_rate))
    tail_len = max(1, int(round(5 * decay * sample_rate)))
    t = np.arange(tail_len) / sample_rate
    ir = np.zeros(start + tail_len + 1)
    ir[0] = 1.0
    ir[start + 1:] = rng.standard_normal(tail_len) * np.exp(-t / decay) * 0.5
    return ir


def reverb(x: np.ndarray, sample_rate: int, decay: float, predelay: float, seed: int) -> np.ndarray:
    wet = fftconvolve(x, reverb_ir(sample_rate, decay, predelay, seed))[: x.size]
    peak_in = np.max(np.abs(x))
    peak_out = np.max(np.abs(wet))
    if peak_out == 0:
        return np.zeros_like(x)
    return wet * (peak_in / peak_out)


def apply_augment(buf: AudioBuffer, spec: AugmentSpec) -> AudioBuffer:
    x = buf.samples
    sr = buf.sample_rate
    p1, p2 = spec.params()
    kind = AugmentKind(spec.kind)
    if kind is AugmentKind.HIGHPASS:
        y = highpass(x, p1, sr)
    elif kind is AugmentKind.LOWPASS:
        y = lowpass(x, p1, sr)
    elif kind is AugmentKind.COMPRESS:
        y = compress(x, p1, p2)
    elif kind is AugmentKind.TIME_SHIFT:
        if p1 != int(p1):
            raise BadParameter(f"time shift must be a whole number of samples, got {p1}")
        y = time_shift(x, int(p1))
    elif kind is AugmentKind.PITCH_SHIFT:
        y = pitch_shift(x, p1)
    else:
        y = reverb(x, sr, p1, p2, spec.seed)
    return AudioBuffer(np.clip(y, -1.0, 1.0), sr)


def random_spec(rng: np.random.Generator, kind: AugmentKind) -> AugmentSpec:
    """Draw parameters for ``kind`` from its documented range."""
    seed = int(rng.integers(2**31))
    if kind is AugmentKind.HIGHPASS:
        return AugmentSpec(kind, float(rng.uniform(100, 500)), 0.0, seed)
    if kind is AugmentKind.LOWPASS:
        return AugmentSpec(kind, float(rng.uniform(2500, 5000)), 0.0, seed)
    if kind is AugmentKind.COMPRESS:
        return AugmentSpec(kind, float(rng.uniform(0.1, 0.5)), float(rng.uniform(2, 8)), seed)
    if kind is AugmentKind.TIME_SHIFT:
        return AugmentSpec(kind, float(rng.integers(-8000, 8001)), 0.0, seed)
    if kind is AugmentKind.PITCH_SHIFT:
        return AugmentSpec(kind, float(rng.uniform(-3, 3)), 0.0, seed)
    return AugmentSpec(kind, float(rng.uniform(0.02, 0.15)), float(rng.uniform(0, 0.02)), seed)


# ---------------------------------------------------------------- plan files

PLAN_HEADER = ["utt_id", "kind", "param1", "param2", "seed"]


def format_plan(rows: Sequence[tuple[str, AugmentSpec]]) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(PLAN_HEADER)
    for utt, spec in rows:
        p1, p2 = spec.params()
        w.writerow([utt, spec.kind.value, repr(p1), repr(p2), spec.seed])
    return out.getvalue()


def parse_plan(text: str) -> list[tuple[str, AugmentSpec]]:
    rows = csv.reader(io.StringIO(text))
    header = next(rows, None)
    if header != PLAN_HEADER:
        raise BadHeader(f"expected header {','.join(PLAN_HEADER)}, got {header}")
    out = []
    for n, row in enumerate(rows, start=2):
        if not row:
            continue
        try:
            kind = AugmentKind(row[1].strip().lower())
        except ValueError:
            raise BadParameter(f"row {n}: unknown augmentation {row[1]!r}") from None
        p1 = float(row[2]) if row[2].strip() else float("nan")
        p2 = float(row[3]) if row[3].strip() else float("nan")
        out.append((row[0], AugmentSpec(kind, p1, p2, int(row[4] or 0))))
    return out


def write_plan(path, rows) -> None:
    Path(path).write_text(format_plan(rows), encoding="utf-8")


def read_plan(path) -> list[tuple[str, AugmentSpec]]:
    return parse_plan(Path(path).read_text(encoding="utf-8"))
