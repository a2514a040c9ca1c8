"""Power spectrum, mel filterbank and log-Mel spectrogram."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import BadFrameLength, NonFiniteInput, TooManyBands
from .fft import is_power_of_two, rfft
from .framing import FrameMatrix

N_FFT = 2048
HOP = 512
N_MELS = 128


class SpecKind(str, enum.Enum):
    LOG_MEL = "log_mel"
    LDP_CODE = "ldp_code"
    INTEGRAL_MAP = "integral_map"


@dataclass(frozen=True)
class SpectrogramMatrix:
    values: np.ndarray  # (n_mels, frame_count)
    kind: SpecKind = SpecKind.LOG_MEL

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 2:
            raise ValueError(f"spectrogram must be 2-D, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise NonFiniteInput("spectrogram contains NaN or Inf")
        if self.kind == SpecKind.LOG_MEL and v.size and v.min() < 0:
            raise ValueError("log-Mel entries must be nonnegative")
        object.__setattr__(self, "values", v)

    @property
    def n_mels(self) -> int:
        return self.values.shape[0]

    @property
    def frame_count(self) -> int:
        return self.values.shape[1]


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_points(n_mels: int, sample_rate: int) -> np.ndarray:
    """n_mels + 2 edge/center frequencies (Hz), uniform on the mel scale."""
    return mel_to_hz(np.linspace(0.0, hz_to_mel(sample_rate / 2), n_mels + 2))


def power_spectrum(frames: FrameMatrix, n_fft: int = N_FFT) -> np.ndarray:
    """|DFT|^2 of each frame, bins 0..n_fft/2, shape (frame_count, n_fft/2 + 1)."""
    if frames.frame_length != n_fft or not is_power_of_two(n_fft):
        raise BadFrameLength(
            f"frame length {frames.frame_length} does not match power-of-two n_fft {n_fft}")
    spec = rfft(frames.frames)
    return spec.real ** 2 + spec.imag ** 2


@lru_cache(maxsize=8)
def _filterbank(n_mels: int, n_fft: int, sample_rate: int) -> np.ndarray:
    n_bins = n_fft // 2 + 1
    if n_mels > n_bins:
        raise TooManyBands(f"{n_mels} bands exceed {n_bins} FFT bins")
    freqs = np.arange(n_bins) * sample_rate / n_fft
    pts = mel_points(n_mels, sample_rate)
    left, center, right = pts[:-2, None], pts[1:-1, None], pts[2:, None]
    rising = (freqs[None, :] - left) / (center - left)
    falling = (right - freqs[None, :]) / (right - center)
    bank = np.maximum(0.0, np.minimum(rising, falling))
    if np.any(bank.sum(axis=1) <= 0):
        raise TooManyBands(f"{n_mels} bands leave some filters without any FFT bin")
    bank.flags.writeable = False
    return bank


def mel_filterbank(n_mels: int = N_MELS, n_fft: int = N_FFT, sample_rate: int = 16000) -> np.ndarray:
    """Peak-normalised triangular filters, shape (n_mels, n_fft/2 + 1).

    Triangles are evaluated at the exact bin frequencies, so a row's largest
    entry only reaches 1 when a bin lands on the filter center.
    """
    if n_mels < 1:
        raise TooManyBands("n_mels must be at least 1")
    return _filterbank(n_mels, n_fft, sample_rate)


def log_mel(frames: FrameMatrix, n_mels: int = N_MELS, sample_rate: int = 16000) -> SpectrogramMatrix:
    power = power_spectrum(frames, frames.frame_length)
    bank = mel_filterbank(n_mels, frames.frame_length, sample_rate)
    energies = bank @ power.T  # (n_mels, frame_count)
    return SpectrogramMatrix(np.log1p(energies), SpecKind.LOG_MEL)
