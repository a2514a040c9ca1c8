"""End-to-end orchestration: synthetic corpora, feature extraction, staged
training, scoring and evaluation."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
import os
import struct
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from . import augment as aug
from .audio_io import (
    AudioBuffer,
    Label,
    ManifestEntry,
    Subset,
    parse_wav,
    read_manifest,
    resample,
    write_manifest,
    write_wav,
)
from .classifier import (
    BONA_FIDE,
    SPOOF,
    HeadParams,
    ScoreRecord,
    check_labels,
    head_backward,
    head_forward,
    init_head,
    score,
    train_head,
)
from .errors import BadConfig, BadContainer, IoFailure, MissingModel
from .fft import is_power_of_two
from .framing import frame_signal
from .fusion import NormStats, encode_stdc, fit_norm, init_autoencoder, normalize, train_autoencoder
from .ldp import sdc_features
from .melspec import SpectrogramMatrix, log_mel
from .metrics import EvalReport, compute_eer, format_det, format_report, write_scores
from .temporal import (
    BiLstmParams,
    bilstm_backward,
    bilstm_forward,
    init_bilstm,
    prepare_batch,
    set_input_stats,
    stc_features,
)
from .tensorcore import AdamState, adam_step, batch_order, load_tensors, round_to_float32, save_tensors, xent_softmax

log = logging.getLogger(__name__)

FEATURE_DIM = 128
FEATURE_KINDS = {"sdc": 1, "stc": 2, "stdc": 3}
FEATURE_MAGIC = b"SDCF"
FEATURE_VERSION = 1

MODEL_FILES = {
    "stc": "stc.bin",
    "stc_head": "stc_head.bin",
    "norm": "norm.bin",
    "ae": "ae.bin",
    "head": "head.bin",
    "sdc_norm": "sdc_norm.bin",
    "sdc_head": "sdc_head.bin",
}
KIND_MODELS = {
    "sdc": ("sdc_norm", "sdc_head"),
    "stc": ("stc", "stc_head"),
    "stdc": ("stc", "norm", "ae", "head"),
}


# ---------------------------------------------------------------- config


@dataclass
class PipelineConfig:
    sample_rate: int = 16000
    n_fft: int = 2048
    hop: int = 512
    n_mels: int = 128
    max_frames: int = 256
    seed: int = 0
    model_dir: str = "models"
    cache_dir: str = ""
    workers: int = 1
    epochs: int = 50
    batch_size: int = 32
    lr: float = 1e-4
    weight_decay: float = 1e-3
    head: str = "mlp"
    augment: bool = True
    stc_lr: float = 1e-3

    def __post_init__(self):
        for name in ("sample_rate", "n_fft", "hop", "n_mels", "max_frames", "workers",
                     "epochs", "batch_size"):
            if getattr(self, name) <= 0:
                raise BadConfig(f"{name} must be positive")
        if self.lr <= 0 or self.stc_lr <= 0 or self.weight_decay < 0:
            raise BadConfig("lr must be positive and weight_decay nonnegative")
        if not is_power_of_two(self.n_fft):
            raise BadConfig(f"n_fft {self.n_fft} is not a power of two")
        if self.head not in ("mlp", "logistic"):
            raise BadConfig(f"unknown head {self.head!r}")

    @property
    def min_samples(self) -> int:
        # three frames, the smallest spectrogram the 3x3 LDP can code
        return self.n_fft + 2 * self.hop

    def feature_hash(self) -> str:
        key = f"{self.sample_rate}:{self.n_fft}:{self.hop}:{self.n_mels}"
        return hashlib.sha256(key.encode()).hexdigest()[:16]


def parse_config(text: str, **overrides) -> PipelineConfig:
    fields = {f.name: f for f in dataclasses.fields(PipelineConfig)}
    values = {}
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise BadConfig(f"line {n}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in fields:
            raise BadConfig(f"line {n}: unknown key {key!r}")
        values[key] = value
    values.update({k: v for k, v in overrides.items() if v is not None})
    typed = {}
    for key, value in values.items():
        kind = fields[key].type
        try:
            if kind == "bool":
                flag = str(value).lower()
                if flag not in ("1", "true", "yes", "on", "0", "false", "no", "off"):
                    raise ValueError(flag)
                typed[key] = flag in ("1", "true", "yes", "on")
            elif kind == "int":
                typed[key] = int(value)
            elif kind == "float":
                typed[key] = float(value)
            else:
                typed[key] = str(value)
        except ValueError:
            raise BadConfig(f"bad value for {key}: {value!r}") from None
    return PipelineConfig(**typed)


def load_config(path=None, **overrides) -> PipelineConfig:
    text = Path(path).read_text(encoding="utf-8") if path else ""
    return parse_config(text, **overrides)


def stage_seeds(seed: int, n: int = 8) -> list[int]:
    return [int(s) for s in np.random.default_rng(seed).integers(2**63, size=n)]


# ---------------------------------------------------------------- feature files


@dataclass
class FeatureFile:
    kind: str
    vectors: np.ndarray  # (count, dim) float32 values
    ids: list = field(default_factory=list)


def dumps_features(ff: FeatureFile) -> bytes:
    vectors = np.asarray(ff.vectors, dtype="<f4").reshape(len(ff.ids), FEATURE_DIM)
    parts = [FEATURE_MAGIC, struct.pack("<HBII", FEATURE_VERSION, FEATURE_KINDS[ff.kind],
                                        len(ff.ids), FEATURE_DIM), vectors.tobytes()]
    for utt in ff.ids:
        encoded = utt.encode("utf-8")
        parts.append(struct.pack("<I", len(encoded)))
        parts.append(encoded)
    return b"".join(parts)


def loads_features(data: bytes) -> FeatureFile:
    if data[:4] != FEATURE_MAGIC:
        raise BadContainer("missing SDCF magic")
    try:
        version, kind, count, dim = struct.unpack_from("<HBII", data, 4)
    except struct.error:
        raise BadContainer("truncated feature header") from None
    if version != FEATURE_VERSION:
        raise BadContainer(f"unsupported feature file version {version}")
    names = {v: k for k, v in FEATURE_KINDS.items()}
    if kind not in names or dim != FEATURE_DIM:
        raise BadContainer(f"bad kind {kind} or dimension {dim}")
    pos = 4 + 11
    size = count * dim * 4
    if pos + size > len(data):
        raise BadContainer("feature payload truncated")
    vectors = np.frombuffer(data[pos:pos + size], dtype="<f4").reshape(count, dim).copy()
    pos += size
    ids = []
    for _ in range(count):
        if pos + 4 > len(data):
            raise BadContainer("utterance id table truncated")
        (n,) = struct.unpack_from("<I", data, pos)
        ids.append(data[pos + 4:pos + 4 + n].decode("utf-8"))
        pos += 4 + n
    if pos != len(data):
        raise BadContainer("trailing bytes after utterance ids")
    return FeatureFile(names[kind], vectors, ids)


def write_features(path, ff: FeatureFile) -> None:
    Path(path).write_bytes(dumps_features(ff))


def read_features(path) -> FeatureFile:
    return loads_features(Path(path).read_bytes())


# ---------------------------------------------------------------- front end


@dataclass(frozen=True)
class Utterance:
    utt_id: str
    label: int
    audio: AudioBuffer
    digest: str = ""  # content hash of the source file, empty for derived audio


def label_index(label: Label) -> int:
    return BONA_FIDE if label == Label.BONA_FIDE else SPOOF


def prepare_audio(buf: AudioBuffer, config: PipelineConfig) -> AudioBuffer:
    buf = resample(buf, config.sample_rate)
    if len(buf) < config.min_samples:
        padded = np.zeros(config.min_samples)
        padded[:len(buf)] = buf.samples
        buf = AudioBuffer(padded, buf.sample_rate)
    return buf


def load_utterance(entry: ManifestEntry, base_dir: Path, config: PipelineConfig) -> Utterance:
    path = base_dir / entry.path
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc.strerror}") from None
    buf = prepare_audio(parse_wav(data), config)
    return Utterance(entry.path, label_index(entry.label), buf, hashlib.sha256(data).hexdigest()[:24])


def spectrogram(buf: AudioBuffer, config: PipelineConfig) -> SpectrogramMatrix:
    frames = frame_signal(buf, config.n_fft, config.hop, windowed=True)
    return log_mel(frames, config.n_mels, config.sample_rate)


class FeatureCache:
    """Log-Mel + SDC per (file content hash, config hash); files are replaced
    atomically so concurrent writers of one key leave a whole file."""

    def __init__(self, root):
        self.root = Path(root) if root else None
        if self.root:
            self.root.mkdir(parents=True, exist_ok=True)

    def _path(self, digest: str, config: PipelineConfig) -> Optional[Path]:
        if not self.root or not digest:
            return None
        return self.root / f"{digest}-{config.feature_hash()}.npz"

    def get(self, digest, config):
        path = self._path(digest, config)
        if path is None or not path.exists():
            return None
        with np.load(path) as z:
            return SpectrogramMatrix(z["log_mel"]), z["sdc"].copy()

    def put(self, digest, config, spec: SpectrogramMatrix, sdc: np.ndarray) -> None:
        path = self._path(digest, config)
        if path is None:
            return
        fd, tmp = tempfile.mkstemp(dir=self.root, suffix=".tmp")
        with os.fdopen(fd, "wb") as fh:
            np.savez(fh, log_mel=spec.values, sdc=sdc)
        os.replace(tmp, path)


def front_end(utt: Utterance, config: PipelineConfig, cache: Optional[FeatureCache] = None):
    """(log-Mel spectrogram, SDC vector) of one utterance."""
    if cache is not None:
        hit = cache.get(utt.digest, config)
        if hit is not None:
            return hit
    spec = spectrogram(utt.audio, config)
    sdc = sdc_features(spec)
    if cache is not None:
        cache.put(utt.digest, config, spec, sdc)
    return spec, sdc


def parallel_map(fn: Callable, items: Sequence, workers: int) -> list:
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------- models


class Models:
    """Trained artifacts in a model directory, loaded on demand."""

    def __init__(self, model_dir):
        self.dir = Path(model_dir)

    def path(self, name: str) -> Path:
        return self.dir / MODEL_FILES[name]

    def require(self, kind: str) -> None:
        missing = [MODEL_FILES[n] for n in KIND_MODELS[kind] if not self.path(n).exists()]
        if missing:
            raise MissingModel(f"{kind} needs {', '.join(missing)} in {self.dir}")

    def tensors(self, name: str):
        path = self.path(name)
        if not path.exists():
            raise MissingModel(f"missing {path}")
        return load_tensors(path)

    def bilstm(self) -> BiLstmParams:
        return BiLstmParams(self.tensors("stc"))

    def head(self, name: str) -> HeadParams:
        t = self.tensors(name)
        return HeadParams("mlp" if "hid.w" in t else "logistic", t)

    def norm(self, name: str) -> NormStats:
        return NormStats.from_tensors(self.tensors(name))


def extract_vectors(kind: str, fronts: Sequence, models: Models, config: PipelineConfig) -> np.ndarray:
    """(N, 128) features from per-utterance (log-Mel, SDC) pairs."""
    if kind != "sdc":
        models.require(kind)
    if not fronts:
        return np.zeros((0, FEATURE_DIM))
    sdc = np.stack([f[1] for f in fronts])
    if kind == "sdc":
        return sdc
    lstm = models.bilstm()
    stc = np.stack(parallel_map(lambda f: stc_features(f[0], lstm, config.max_frames), fronts,
                                config.workers))
    if kind == "stc":
        return stc
    return encode_stdc(sdc, stc, models.norm("norm"), models.tensors("ae"))


def head_inputs(kind: str, fronts: Sequence, models: Models, config: PipelineConfig):
    """Features plus the head that scores them for ``kind``."""
    models.require(kind)
    x = extract_vectors(kind, fronts, models, config)
    if kind == "sdc":
        return normalize(x, models.norm("sdc_norm")), models.head("sdc_head")
    if kind == "stc":
        return x, models.head("stc_head")
    return x, models.head("head")


# ---------------------------------------------------------------- training


def balance_with_augmentation(utts: list[Utterance], seed: int) -> tuple[list[Utterance], list]:
    """Augment minority-class copies until both classes are equally common."""
    labels = np.array([u.label for u in utts])
    n_b, n_s = int(np.sum(labels == BONA_FIDE)), int(np.sum(labels == SPOOF))
    if n_b == n_s:
        return utts, []
    minority = BONA_FIDE if n_b < n_s else SPOOF
    pool = [u for u in utts if u.label == minority]
    rng = np.random.default_rng(seed)
    kinds = list(aug.AugmentKind)
    extra, plan = [], []
    for i in range(abs(n_b - n_s)):
        src = pool[i % len(pool)]
        spec = aug.random_spec(rng, kinds[i % len(kinds)])
        utt_id = f"{src.utt_id}#aug{i}"
        extra.append(Utterance(utt_id, src.label, aug.apply_augment(src.audio, spec)))
        plan.append((utt_id, spec))
    return utts + extra, plan


def train_stc(specs, labels, config: PipelineConfig, seed: int):
    """Jointly fit the Bi-LSTM and an MLP head on cross-entropy."""
    rng = np.random.default_rng(seed)
    lstm = init_bilstm(int(rng.integers(2**63)), input_size=config.n_mels)
    frames = np.concatenate([s.values[:, :config.max_frames].T for s in specs])
    set_input_stats(lstm, frames)
    head = init_head("mlp", int(rng.integers(2**63)), in_dim=lstm.output_size)

    params = {f"lstm.{k}": v for k, v in lstm.trainable().items()}
    params.update({f"head.{k}": v for k, v in head.tensors.items()})
    state = AdamState(lr=config.stc_lr, weight_decay=config.weight_decay)
    y = np.asarray(labels)
    for epoch in range(config.epochs):
        total = 0.0
        for idx in batch_order(rng, len(specs), config.batch_size):
            xs, mask = prepare_batch([specs[i] for i in idx], lstm, config.max_frames)
            summary, lcache = bilstm_forward(lstm, xs, mask)
            logits, hcache = head_forward(head, summary)
            loss, dlogits = xent_softmax(logits, y[idx])
            hgrads, dsummary = head_backward(head, dlogits, hcache)
            lgrads, _ = bilstm_backward(lstm, dsummary, lcache)
            grads = {f"lstm.{k}": v for k, v in lgrads.items()}
            grads.update({f"head.{k}": v for k, v in hgrads.items()})
            adam_step(params, grads, state)
            total += loss * len(idx)
        log.info("stc epoch %d loss %.5f", epoch, total / len(specs))
    lstm = BiLstmParams(round_to_float32(lstm.tensors))
    head = HeadParams("mlp", round_to_float32(head.tensors))
    return lstm, head


def train_pipeline(entries: Sequence[ManifestEntry], base_dir, config: PipelineConfig) -> Models:
    """All four training stages; artifacts land in ``config.model_dir``."""
    seeds = stage_seeds(config.seed)
    train = [e for e in entries if e.subset == Subset.TRAIN]
    check_labels(np.array([label_index(e.label) for e in train]))
    cache = FeatureCache(config.cache_dir)
    out = Path(config.model_dir)
    out.mkdir(parents=True, exist_ok=True)
    models = Models(out)

    # stage 1: audio, balancing, log-Mel + SDC
    utts = parallel_map(lambda e: load_utterance(e, Path(base_dir), config), train, config.workers)
    plan = []
    if config.augment:
        utts, plan = balance_with_augmentation(utts, seeds[0])
        aug.write_plan(out / "augment_plan.csv", plan)
    fronts = parallel_map(lambda u: front_end(u, config, cache), utts, config.workers)
    specs = [f[0] for f in fronts]
    sdc = np.stack([f[1] for f in fronts])
    y = np.array([u.label for u in utts])
    log.info("stage 1: %d training utterances (%d augmented)", len(utts), len(plan))

    # stage 2: Bi-LSTM + head
    lstm, stc_head = train_stc(specs, y, config, seeds[1])
    save_tensors(models.path("stc"), lstm.tensors)
    save_tensors(models.path("stc_head"), stc_head.tensors)
    stc = np.stack([stc_features(s, lstm, config.max_frames) for s in specs])
    log.info("stage 2: temporal network trained")

    # stage 3: normalisation + autoencoder
    concat = np.concatenate([sdc, stc], axis=1)
    stats = fit_norm(concat)
    save_tensors(models.path("norm"), stats.to_tensors())
    ae = init_autoencoder(seeds[2], dims=(concat.shape[1], 192, FEATURE_DIM))
    ae = round_to_float32(train_autoencoder(normalize(concat, stats), ae, seeds[3],
                                            epochs=config.epochs, batch_size=config.batch_size,
                                            lr=config.lr, weight_decay=config.weight_decay))
    save_tensors(models.path("ae"), ae)
    log.info("stage 3: autoencoder trained")

    # stage 4: final head on STDC, plus the SDC-only ablation head
    stdc = encode_stdc(sdc, stc, stats, ae)
    train_kw = dict(epochs=config.epochs, batch_size=config.batch_size, lr=config.lr,
                    weight_decay=config.weight_decay)
    head = train_head(stdc, y, config.head, seeds[4], **train_kw)
    save_tensors(models.path("head"), round_to_float32(head.tensors))
    sdc_stats = fit_norm(sdc)
    save_tensors(models.path("sdc_norm"), sdc_stats.to_tensors())
    sdc_head = train_head(normalize(sdc, sdc_stats), y, config.head, seeds[5], **train_kw)
    save_tensors(models.path("sdc_head"), round_to_float32(sdc_head.tensors))
    log.info("stage 4: heads trained")
    return models


# ---------------------------------------------------------------- scoring


def load_fronts(entries, base_dir, config: PipelineConfig):
    cache = FeatureCache(config.cache_dir)

    def one(e):
        return front_end(load_utterance(e, Path(base_dir), config), config, cache)

    return parallel_map(one, entries, config.workers)


def extract_features(entries, base_dir, config: PipelineConfig, kind: str) -> FeatureFile:
    if kind not in FEATURE_KINDS:
        raise BadConfig(f"unknown feature kind {kind!r}")
    models = Models(config.model_dir)
    if kind != "sdc":
        models.require(kind)
    fronts = load_fronts(entries, base_dir, config)
    vectors = extract_vectors(kind, fronts, models, config)
    return FeatureFile(kind, vectors.astype(np.float32), [e.path for e in entries])


def score_entries(entries, base_dir, config: PipelineConfig, kind: str = "stdc") -> list[ScoreRecord]:
    models = Models(config.model_dir)
    models.require(kind)
    fronts = load_fronts(entries, base_dir, config)
    if not fronts:
        return []
    x, head = head_inputs(kind, fronts, models, config)
    s = score(x, head)
    return [ScoreRecord(e.path, float(v), label_index(e.label)) for e, v in zip(entries, s)]


def evaluate(entries, base_dir, config: PipelineConfig, out_dir, kind: str = "stdc") -> dict:
    """Score dev and eval subsets; write scores, report and DET points."""
    Models(config.model_dir).require(kind)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    reports: dict[str, EvalReport] = {}
    for subset in (Subset.DEV, Subset.EVAL):
        chosen = [e for e in entries if e.subset == subset]
        if not chosen:
            continue
        records = score_entries(chosen, base_dir, config, kind)
        write_scores(out / f"{kind}_{subset.value}_scores.csv", records)
        report = compute_eer(records)
        (out / f"{kind}_{subset.value}_report.txt").write_text(
            format_report(report, f"{kind} {subset.value}"), encoding="utf-8")
        (out / f"{kind}_{subset.value}_det.csv").write_text(format_det(report), encoding="utf-8")
        reports[subset.value] = report
    return reports


# ---------------------------------------------------------------- synthetic corpus


@dataclass(frozen=True)
class SynthSpec:
    count: int = 400
    duration: float = 1.0
    sample_rate: int = 16000
    bona_share: float = 0.25
    partial_fraction: float = 0.3
    noise: float = 0.01
    # narrow tone ranges keep every spoof cue (shifted f2 at 1.8-2.4x, 2nd/3rd
    # harmonics of f1) outside the range bona fide tones can take
    f1_range: tuple = (900.0, 1000.0)
    f2_range: tuple = (180.0, 220.0)
    # slow enough that the gaps between bursts span several 32 ms hops
    env_rate_range: tuple = (1.0, 3.0)


@dataclass(frozen=True)
class UttPlan:
    name: str
    style: str  # bona_fide | full | partial | replay
    subset: str
    seed: int
    h: float
    l: float
    f1: float
    f2: float
    env_rate: float
    env_phase: float
    shift: float = 1.0
    seg_start: int = 0
    seg_len: int = 0


SPOOF_STYLES = ("full", "partial", "replay")


def plan_corpus(spec: SynthSpec, seed: int) -> list[UttPlan]:
    """Deterministic per-utterance generation plan with stratified splits."""
    rng = np.random.default_rng(seed)
    n_bona = max(1, int(round(spec.count * spec.bona_share)))
    styles = ["bona_fide"] * n_bona + [SPOOF_STYLES[i % 3] for i in range(spec.count - n_bona)]
    n = int(round(spec.duration * spec.sample_rate))
    plans = []
    for i, style in enumerate(styles):
        h = float(rng.uniform(0.2, 0.4))
        l = float(rng.uniform(0.2, 0.4))
        p = dict(name=f"utt{i:05d}.wav", style=style, subset="", seed=int(rng.integers(2**31)),
                 h=h, l=l, f1=float(rng.uniform(*spec.f1_range)), f2=float(rng.uniform(*spec.f2_range)),
                 env_rate=float(rng.uniform(*spec.env_rate_range)), env_phase=float(rng.uniform(0, 2 * np.pi)))
        if style == "partial":
            p["shift"] = float(rng.uniform(1.8, 2.4))
            p["seg_len"] = int(round(spec.partial_fraction * n))
            p["seg_start"] = int(rng.integers(0, n - p["seg_len"] + 1))
        plans.append(p)
    # stratified 60/20/20 split per class
    for cls in ("bona_fide", "spoof"):
        idx = [i for i, s in enumerate(styles) if (s == "bona_fide") == (cls == "bona_fide")]
        idx = list(rng.permutation(idx))
        n_train = int(round(0.6 * len(idx)))
        n_dev = int(round(0.2 * len(idx)))
        for k, i in enumerate(idx):
            plans[i]["subset"] = "train" if k < n_train else "dev" if k < n_train + n_dev else "eval"
    return [UttPlan(**p) for p in plans]


def envelope(plan: UttPlan, t: np.ndarray) -> np.ndarray:
    """Syllable-like amplitude envelope that dips to silence between bursts."""
    return 0.5 - 0.5 * np.cos(2 * np.pi * plan.env_rate * t + plan.env_phase)


def render_utterance(plan: UttPlan, spec: SynthSpec, style: Optional[str] = None) -> np.ndarray:
    """Samples for ``plan``; ``style`` overrides the plan's style (used to
    render the untouched bona fide base of a spoof)."""
    style = style or plan.style
    sr = spec.sample_rate
    n = int(round(spec.duration * sr))
    t = np.arange(n) / sr
    rng = np.random.default_rng(plan.seed)
    noise = spec.noise * rng.standard_normal(n)
    env = envelope(plan, t)
    if style == "full":
        env = np.full(n, env.mean())
    tone = plan.h * np.sin(2 * np.pi * plan.f1 * t) + plan.l * np.sin(2 * np.pi * plan.f2 * t)
    if style == "replay":
        # loudspeaker nonlinearity: second and third harmonics of the upper tone
        tone = tone + 0.5 * plan.h * (np.sin(2 * np.pi * 2 * plan.f1 * t)
                                      + np.sin(2 * np.pi * 3 * plan.f1 * t))
    x = env * tone + noise
    if style == "partial":
        sub = env * (plan.h * np.sin(2 * np.pi * plan.f1 * t)
                     + plan.l * np.sin(2 * np.pi * plan.f2 * plan.shift * t)) + noise
        seg = slice(plan.seg_start, plan.seg_start + plan.seg_len)
        x[seg] = sub[seg]
    return np.clip(x, -1.0, 1.0)


def synth_corpus(out_dir, spec: SynthSpec = SynthSpec(), seed: int = 0) -> list[ManifestEntry]:
    """Write WAVs, ``manifest.csv`` and ``synth_plan.json`` into ``out_dir``."""
    out = Path(out_dir)
    try:
        (out / "wav").mkdir(parents=True, exist_ok=True)
        plans = plan_corpus(spec, seed)
        entries = []
        for p in plans:
            rel = f"wav/{p.name}"
            write_wav(out / rel, AudioBuffer(render_utterance(p, spec), spec.sample_rate))
            label = Label.BONA_FIDE if p.style == "bona_fide" else Label.SPOOF
            entries.append(ManifestEntry(rel, label, Subset(p.subset),
                                         None if p.style == "bona_fide" else p.style))
        write_manifest(out / "manifest.csv", entries)
        (out / "synth_plan.json").write_text(json.dumps(
            {"spec": dataclasses.asdict(spec), "seed": seed,
             "utterances": [dataclasses.asdict(p) for p in plans]}, indent=1), encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot write corpus to {out}: {exc}") from None
    return entries


def manifest_with_base(path) -> tuple[list[ManifestEntry], Path]:
    return read_manifest(path), Path(path).resolve().parent
