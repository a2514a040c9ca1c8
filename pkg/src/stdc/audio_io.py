"""Audio buffers, WAV reading/writing, resampling, test tones and manifests."""

from __future__ import annotations

import csv
import enum
import io
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import (
    AliasedFrequency,
    BadHeader,
    BadLabel,
    CorruptHeader,
    DuplicatePath,
    EmptyAudio,
    NonFiniteInput,
    UnsupportedFormat,
)

CANONICAL_RATE = 16000

WAVE_FORMAT_PCM = 0x0001
WAVE_FORMAT_IEEE_FLOAT = 0x0003
WAVE_FORMAT_EXTENSIBLE = 0xFFFE


@dataclass(frozen=True)
class AudioBuffer:
    """Mono samples in [-1, 1] plus their sample rate in Hz."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        samples = np.array(self.samples, dtype=np.float64).reshape(-1)
        if samples.size == 0:
            raise EmptyAudio("audio buffer has zero samples")
        if not np.all(np.isfinite(samples)):
            raise NonFiniteInput("audio buffer contains NaN or Inf")
        if int(self.sample_rate) <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate


# ---------------------------------------------------------------- WAV


def _read_fmt(body: bytes) -> tuple[int, int, int, int]:
    if len(body) < 16:
        raise CorruptHeader(f"fmt chunk too short ({len(body)} bytes)")
    tag, channels, rate, _byte_rate, block_align, bits = struct.unpack("<HHIIHH", body[:16])
    if tag == WAVE_FORMAT_EXTENSIBLE:
        if len(body) < 40:
            raise CorruptHeader("extensible fmt chunk too short")
        # first two bytes of the SubFormat GUID carry the real format tag
        tag = struct.unpack("<H", body[24:26])[0]
    if channels == 0 or rate == 0 or block_align == 0:
        raise CorruptHeader("fmt chunk has zero channels, rate or block alignment")
    return tag, channels, rate, bits


def parse_wav(data: bytes) -> AudioBuffer:
    """Decode an in-memory RIFF/WAVE file (PCM16 or float32, mono or stereo)."""
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise CorruptHeader("missing RIFF/WAVE signature")
    fmt = None
    payload = None
    pos = 12
    while pos + 8 <= len(data):
        chunk_id = data[pos:pos + 4]
        size = struct.unpack("<I", data[pos + 4:pos + 8])[0]
        body = data[pos + 8:pos + 8 + size]
        if len(body) < size and chunk_id != b"data":
            raise CorruptHeader(f"chunk {chunk_id!r} truncated")
        if chunk_id == b"fmt ":
            fmt = _read_fmt(body)
        elif chunk_id == b"data":
            payload = body
        pos += 8 + size + (size & 1)
    if fmt is None:
        raise CorruptHeader("no fmt chunk")
    if payload is None:
        raise CorruptHeader("no data chunk")

    tag, channels, rate, bits = fmt
    if channels not in (1, 2):
        raise UnsupportedFormat(f"{channels} channels (only mono and stereo)")
    if tag == WAVE_FORMAT_PCM and bits == 16:
        dtype, scale = np.dtype("<i2"), 1.0 / 32768.0
    elif tag == WAVE_FORMAT_IEEE_FLOAT and bits == 32:
        dtype, scale = np.dtype("<f4"), 1.0
    else:
        raise UnsupportedFormat(f"format tag {tag:#06x} with {bits} bits per sample")

    frame_bytes = dtype.itemsize * channels
    n_frames = len(payload) // frame_bytes
    if n_frames == 0:
        raise EmptyAudio("data chunk holds no complete sample frames")
    raw = np.frombuffer(payload[:n_frames * frame_bytes], dtype=dtype)
    samples = raw.astype(np.float64).reshape(n_frames, channels).mean(axis=1) * scale
    if not np.all(np.isfinite(samples)):
        raise NonFiniteInput("WAV payload contains NaN or Inf")
    return AudioBuffer(samples, rate)


def load_wav(path) -> AudioBuffer:
    return parse_wav(Path(path).read_bytes())


def wav_bytes(buf: AudioBuffer, float32: bool = False) -> bytes:
    """Encode a buffer as a mono RIFF/WAVE file (PCM16 by default)."""
    if float32:
        tag, bits = WAVE_FORMAT_IEEE_FLOAT, 32
        payload = np.asarray(buf.samples, dtype="<f4").tobytes()
    else:
        tag, bits = WAVE_FORMAT_PCM, 16
        pcm = np.clip(np.round(buf.samples * 32768.0), -32768, 32767).astype("<i2")
        payload = pcm.tobytes()
    block_align = bits // 8
    out = io.BytesIO()
    out.write(b"RIFF")
    out.write(struct.pack("<I", 4 + 8 + 16 + 8 + len(payload) + (len(payload) & 1)))
    out.write(b"WAVE")
    out.write(b"fmt ")
    out.write(struct.pack("<IHHIIHH", 16, tag, 1, buf.sample_rate,
                          buf.sample_rate * block_align, block_align, bits))
    out.write(b"data")
    out.write(struct.pack("<I", len(payload)))
    out.write(payload)
    if len(payload) & 1:
        out.write(b"\x00")
    return out.getvalue()


def write_wav(path, buf: AudioBuffer, float32: bool = False) -> None:
    Path(path).write_bytes(wav_bytes(buf, float32=float32))


# ---------------------------------------------------------------- signals


def synth_two_tone(h: float, l: float, f1: float, f2: float,
                   duration: float, sample_rate: int = CANONICAL_RATE) -> AudioBuffer:
    """h*sin(2*pi*f1*t) + l*sin(2*pi*f2*t) sampled at ``sample_rate``."""
    nyquist = sample_rate / 2
    for f in (f1, f2):
        if f >= nyquist:
            raise AliasedFrequency(f"{f} Hz is at or above Nyquist ({nyquist} Hz)")
    if duration <= 0:
        raise ValueError("duration must be positive")
    n = int(round(duration * sample_rate))
    t = np.arange(n) / sample_rate
    samples = h * np.sin(2 * np.pi * f1 * t) + l * np.sin(2 * np.pi * f2 * t)
    return AudioBuffer(samples, sample_rate)


def resample(buf: AudioBuffer, target_rate: int) -> AudioBuffer:
    """Linear-interpolation resampler; output length is floor(n * target / source)."""
    if target_rate <= 0:
        raise ValueError("target_rate must be positive")
    if target_rate == buf.sample_rate:
        return buf
    n_out = (buf.samples.size * target_rate) // buf.sample_rate
    if n_out == 0:
        raise EmptyAudio("resampling leaves no samples")
    positions = np.arange(n_out) * (buf.sample_rate / target_rate)
    out = np.interp(positions, np.arange(buf.samples.size), buf.samples)
    return AudioBuffer(out, target_rate)


# ---------------------------------------------------------------- manifests


class Label(str, enum.Enum):
    BONA_FIDE = "bona_fide"
    SPOOF = "spoof"


class Subset(str, enum.Enum):
    TRAIN = "train"
    DEV = "dev"
    EVAL = "eval"


MANIFEST_HEADER = ["path", "label", "subset", "attack_tag"]


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    label: Label
    subset: Subset
    attack_tag: Optional[str] = field(default=None)


def _parse_enum(cls, token: str, row: int, column: str):
    try:
        return cls(token.strip().lower())
    except ValueError:
        raise BadLabel(f"row {row}: unknown {column} {token!r}") from None


def parse_manifest(text: str) -> list[ManifestEntry]:
    rows = csv.reader(io.StringIO(text))
    header = next(rows, None)
    if header is None or [h.strip() for h in header] != MANIFEST_HEADER:
        raise BadHeader(f"expected header {','.join(MANIFEST_HEADER)}, got {header}")
    entries: list[ManifestEntry] = []
    seen: set[str] = set()
    for row_no, row in enumerate(rows, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) not in (3, 4):
            raise BadHeader(f"row {row_no}: expected 4 columns, got {len(row)}")
        path = row[0].strip()
        if path in seen:
            raise DuplicatePath(f"row {row_no}: duplicate path {path!r}")
        seen.add(path)
        tag = row[3].strip() if len(row) == 4 else ""
        entries.append(ManifestEntry(
            path=path,
            label=_parse_enum(Label, row[1], row_no, "label"),
            subset=_parse_enum(Subset, row[2], row_no, "subset"),
            attack_tag=tag or None,
        ))
    return entries


def read_manifest(path) -> list[ManifestEntry]:
    # newline="" keeps CRLF handling inside the csv module
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_manifest(fh.read())


def format_manifest(entries: Iterable[ManifestEntry]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(MANIFEST_HEADER)
    for e in entries:
        writer.writerow([e.path, e.label.value, e.subset.value, e.attack_tag or ""])
    return out.getvalue()


def write_manifest(path, entries: Sequence[ManifestEntry]) -> None:
    Path(path).write_text(format_manifest(entries), encoding="utf-8")
