"""Hamming windowing and overlapping framing."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .audio_io import AudioBuffer
from .errors import SignalTooShort, ZeroLength

HAMMING_ALPHA = 0.54
HAMMING_BETA = 0.46


@dataclass(frozen=True)
class FrameMatrix:
    frames: np.ndarray  # (frame_count, frame_length)
    frame_length: int
    hop: int
    windowed: bool = True

    @property
    def frame_count(self) -> int:
        return self.frames.shape[0]


def hamming_window(n: int) -> np.ndarray:
    """Symmetric Hamming window, w[i] = 0.54 - 0.46 cos(2 pi i / (n - 1))."""
    if n < 1:
        raise ZeroLength("window length must be at least 1")
    if n == 1:
        return np.ones(1)
    idx = np.arange(n)
    w = HAMMING_ALPHA - HAMMING_BETA * np.cos(2 * np.pi * idx / (n - 1))
    # make the symmetry exact, cos() is not bit-symmetric around pi
    half = n // 2
    w[n - half:] = w[:half][::-1]
    return w


def frame_count(signal_length: int, frame_length: int, hop: int) -> int:
    if signal_length < frame_length:
        return 0
    return (signal_length - frame_length) // hop + 1


def frame_signal(buf: AudioBuffer, frame_length: int = 2048, hop: int = 512,
                 windowed: bool = True) -> FrameMatrix:
    """Cut ``buf`` into frames of ``frame_length`` every ``hop`` samples.

    A trailing partial frame is dropped.
    """
    if frame_length < 1 or hop < 1:
        raise ZeroLength("frame_length and hop must be at least 1")
    x = buf.samples
    count = frame_count(x.size, frame_length, hop)
    if count == 0:
        raise SignalTooShort(f"{x.size} samples is shorter than one frame ({frame_length})")
    index = np.arange(frame_length)[None, :] + hop * np.arange(count)[:, None]
    frames = x[index]
    if windowed:
        frames = frames * hamming_window(frame_length)[None, :]
    return FrameMatrix(frames, frame_length, hop, windowed)
