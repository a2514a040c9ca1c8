"""Iterative radix-2 FFT for real input, batched over rows."""

from __future__ import annotations

import numpy as np

from .errors import BadFrameLength


def is_power_of_two(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


def _bit_reverse(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.int64)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    return rev


def fft(x: np.ndarray) -> np.ndarray:
    """Complex DFT along the last axis (decimation in time)."""
    x = np.asarray(x, dtype=np.complex128)
    n = x.shape[-1]
    if not is_power_of_two(n):
        raise BadFrameLength(f"FFT length {n} is not a power of two")
    lead = x.shape[:-1]
    x = x[..., _bit_reverse(n)].reshape(-1, n)
    size = 2
    while size <= n:
        half = size // 2
        twiddle = np.exp(-2j * np.pi * np.arange(half) / size)
        blocks = x.reshape(x.shape[0], n // size, size)
        even = blocks[:, :, :half]
        odd = blocks[:, :, half:] * twiddle
        x = np.concatenate([even + odd, even - odd], axis=2).reshape(-1, n)
        size *= 2
    return x.reshape(*lead, n)


def rfft(x: np.ndarray) -> np.ndarray:
    """Non-negative frequency bins 0..n/2 of the DFT of real rows."""
    x = np.asarray(x, dtype=np.float64)
    return fft(x)[..., : x.shape[-1] // 2 + 1]
