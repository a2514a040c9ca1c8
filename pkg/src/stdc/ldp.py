"""Local Deviated Pattern coding and Spectral Deviated Coefficients (SDC).

Neighbours of a cell are visited starting east and moving counter-clockwise,
with row index growing downwards (north is row - 1)::

    NW  N  NE        3  2  1
     W  c  E    ->   4  c  0
    SW  S  SE        5  6  7

Bit ``i`` of an integral code carries weight ``2**i``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonFiniteInput, SpectrogramTooSmall, TooManyBands
from .fft import rfft
from .melspec import SpecKind, SpectrogramMatrix

# (row offset, column offset) in bit order E, NE, N, NW, W, SW, S, SE
NEIGHBOUR_OFFSETS = (
    (0, 1), (-1, 1), (-1, 0), (-1, -1),
    (0, -1), (1, -1), (1, 0), (1, 1),
)
K = len(NEIGHBOUR_OFFSETS)
WEIGHTS = (1 << np.arange(K)).astype(np.int64)

SDC_DIM = 128
SDC_DFT_SIZE = 256


@dataclass(frozen=True)
class LdpMaps:
    """Higher and lower bit planes, each shaped (8, rows - 2, cols - 2)."""

    lhs: np.ndarray
    lls: np.ndarray


@dataclass(frozen=True)
class IntegralMaps:
    """Per-cell 8-bit codes in [0, 255], shaped (rows - 2, cols - 2)."""

    hhs_int: np.ndarray
    lls_int: np.ndarray


def ldp_code_cell(window) -> np.ndarray:
    """Ternary codes (+1, 0, -1) of the 8 neighbours of a 3x3 window.

    Returns an int array of length 8 in bit order. The +1 test is applied
    before the -1 test, so a tie at zero threshold codes as +1.
    """
    w = np.asarray(window, dtype=np.float64)
    if w.shape != (3, 3):
        raise ValueError(f"window must be 3x3, got {w.shape}")
    if not np.all(np.isfinite(w)):
        raise NonFiniteInput("window contains NaN or Inf")
    mu = w.sum() / 9.0
    c = w[1, 1]
    codes = np.zeros(K, dtype=np.int8)
    for i, (dr, dc) in enumerate(NEIGHBOUR_OFFSETS):
        s = w[1 + dr, 1 + dc]
        if s >= c + mu:
            codes[i] = 1
        elif s <= c - mu:
            codes[i] = -1
    return codes


def split_codes(codes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Ternary codes -> (higher, lower) binary planes."""
    return (codes == 1).astype(np.uint8), (codes == -1).astype(np.uint8)


def ldp_codes(values: np.ndarray) -> np.ndarray:
    """Ternary code volume (8, rows - 2, cols - 2) for a 2-D array."""
    s = np.asarray(values, dtype=np.float64)
    rows, cols = s.shape
    if rows < 3 or cols < 3:
        raise SpectrogramTooSmall(f"need at least 3x3 cells, got {rows}x{cols}")
    if not np.all(np.isfinite(s)):
        raise NonFiniteInput("spectrogram contains NaN or Inf")

    def shifted(dr, dc):
        return s[1 + dr:rows - 1 + dr, 1 + dc:cols - 1 + dc]

    center = shifted(0, 0)
    total = center.copy()
    for dr, dc in NEIGHBOUR_OFFSETS:
        total = total + shifted(dr, dc)
    mu = total / 9.0
    upper = center + mu
    lower = center - mu

    codes = np.zeros((K, rows - 2, cols - 2), dtype=np.int8)
    for i, (dr, dc) in enumerate(NEIGHBOUR_OFFSETS):
        n = shifted(dr, dc)
        hi = n >= upper
        codes[i][hi] = 1
        codes[i][~hi & (n <= lower)] = -1
    return codes


def ldp_maps(spec: SpectrogramMatrix) -> LdpMaps:
    lhs, lls = split_codes(ldp_codes(spec.values))
    return LdpMaps(lhs, lls)


def pack_bits(planes: np.ndarray) -> np.ndarray:
    """(8, ...) binary planes -> integer codes, bit i weighted 2**i."""
    planes = np.asarray(planes, dtype=np.int64)
    return np.tensordot(WEIGHTS, planes, axes=(0, 0))


def unpack_bits(codes: np.ndarray) -> np.ndarray:
    """Integer codes in [0, 255] -> (8, ...) binary planes."""
    codes = np.asarray(codes, dtype=np.int64)
    return np.stack([(codes >> i) & 1 for i in range(K)]).astype(np.uint8)


def integralize(maps: LdpMaps) -> IntegralMaps:
    return IntegralMaps(pack_bits(maps.lhs), pack_bits(maps.lls))


def select_sdc_mask(ints: IntegralMaps) -> np.ndarray:
    """Cells whose higher AND lower codes both exceed their central tendency.

    The central tendency of a map is the mean of its per-band (row) means
    over frames.
    """
    ctv_h = ints.hhs_int.mean(axis=1).mean()
    ctv_l = ints.lls_int.mean(axis=1).mean()
    return ((ints.hhs_int > ctv_h) & (ints.lls_int > ctv_l)).astype(np.uint8)


def masked_band_sums(ints: IntegralMaps, mask: np.ndarray) -> np.ndarray:
    """Per-band sum over frames of the retained higher + lower codes."""
    return (mask * (ints.hhs_int + ints.lls_int)).sum(axis=1).astype(np.float64)


def project_sdc(band_sums: np.ndarray) -> np.ndarray:
    """Zero-pad to 256, DFT, keep log(1 + |X|) of bins 0..127."""
    padded = np.zeros(SDC_DFT_SIZE)
    padded[:band_sums.size] = band_sums
    return np.log1p(np.abs(rfft(padded)[:SDC_DIM]))


def sdc_features(spec: SpectrogramMatrix) -> np.ndarray:
    """128-D Spectral Deviated Coefficients of a log-Mel spectrogram."""
    if spec.kind != SpecKind.LOG_MEL:
        raise ValueError(f"expected a log_mel spectrogram, got {spec.kind}")
    if spec.n_mels - 2 > SDC_DFT_SIZE:
        raise TooManyBands(f"{spec.n_mels} bands do not fit the {SDC_DFT_SIZE}-point DFT")
    ints = integralize(ldp_maps(spec))
    mask = select_sdc_mask(ints)
    return project_sdc(masked_band_sums(ints, mask))
