"""Acceptance criteria 1-9, one test each.

Each test prints a ``PASS``/``FAIL`` line (also repeated in the terminal
summary) and then asserts. Criteria 6-8 share one trained model on the
400-utterance synthetic corpus.
"""

import filecmp
import time

import numpy as np
import pytest

import conftest
from eer_oracle import brute_force_eer
from gradcheck import numeric_grad, rel_error
from ldp_oracle import brute_force_codes
from stdc import cli
from stdc import pipeline as P
from stdc.audio_io import AudioBuffer
from stdc.augment import AugmentKind, apply_augment, random_spec
from stdc.classifier import BONA_FIDE, SPOOF, ScoreRecord, head_backward, head_forward, init_head
from stdc.fusion import ae_loss_and_grads, init_autoencoder, reconstruction_loss
from stdc.ldp import LdpMaps, integralize, ldp_codes, ldp_maps, sdc_features, unpack_bits
from stdc.melspec import SpectrogramMatrix
from stdc.metrics import compute_eer
from stdc.temporal import bilstm_backward, bilstm_forward, init_bilstm, lstm_cell, lstm_cell_backward
from stdc.tensorcore import xent_softmax

SEED = 20240501


def verdict(n, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
    conftest.ACCEPTANCE[n] = line
    print(line)
    assert ok, line


# ---------------------------------------------------------------- 1-3: LDP


def test_1_ldp_oracle_equivalence():
    rng = np.random.default_rng(SEED)
    start = time.perf_counter()
    mismatches = 0
    for _ in range(100):
        s = rng.uniform(0, 8, (16, 16))
        maps = ldp_maps(SpectrogramMatrix(s))
        codes = brute_force_codes(s)
        same = (np.array_equal(maps.lhs, (codes == 1).astype(np.uint8))
                and np.array_equal(maps.lls, (codes == -1).astype(np.uint8)))
        mismatches += not same
    elapsed = time.perf_counter() - start
    verdict(1, mismatches == 0 and elapsed < 5.0,
            f"{100 - mismatches}/100 matrices match the brute force, {elapsed:.2f} s (limit 5 s)")


def test_2_bit_encoding_bijection():
    patterns = np.arange(256).reshape(16, 16)
    planes = unpack_bits(patterns)
    ints = integralize(LdpMaps(planes, planes.copy()))
    ok_h = np.array_equal(ints.hhs_int, patterns)
    ok_l = np.array_equal(ints.lls_int, patterns)
    round_trip = np.array_equal(unpack_bits(ints.hhs_int), planes)
    verdict(2, ok_h and ok_l and round_trip, "all 256 patterns recovered on both planes")


def test_3_scaling_invariance():
    rng = np.random.default_rng(SEED + 3)
    failures = 0
    for _ in range(20):
        s = rng.exponential(2.0, (32, 24))
        base = ldp_codes(s)
        failures += sum(not np.array_equal(base, ldp_codes(g * s)) for g in (0.5, 2.0, 10.0))
    verdict(3, failures == 0, f"{60 - failures}/60 scaled code maps identical")


# ---------------------------------------------------------------- 4: EER


def test_4_eer_oracle():
    rng = np.random.default_rng(SEED + 4)
    mismatches = 0
    for k in range(200):
        n = int(rng.integers(2, 21))
        n_b = int(rng.integers(1, n))
        scores = rng.integers(0, 8, n).astype(float) if k % 2 else rng.normal(0, 1, n)
        bona, spoof = list(scores[:n_b]), list(scores[n_b:])
        recs = [ScoreRecord("", s, BONA_FIDE) for s in bona] + [ScoreRecord("", s, SPOOF) for s in spoof]
        mismatches += compute_eer(recs).eer != float(brute_force_eer(bona, spoof)[0])
    verdict(4, mismatches == 0, f"{200 - mismatches}/200 score sets equal the exhaustive oracle")


# ---------------------------------------------------------------- 5: gradients


def _gradient_errors(rng):
    errs = {}

    # softmax cross-entropy
    logits = rng.standard_normal((3, 4))
    labels = [1, 0, 3]
    errs["xent"] = rel_error(xent_softmax(logits, labels)[1],
                             numeric_grad(lambda: xent_softmax(logits, labels)[0], logits))

    # LSTM cell unrolled three steps
    d, n = 3, 4
    wx, wh = rng.standard_normal((d, 4 * n)) * 0.5, rng.standard_normal((n, 4 * n)) * 0.5
    b = rng.standard_normal((1, 4 * n)) * 0.5
    xs = rng.standard_normal((3, 2, d))
    r = rng.standard_normal((2, n))

    def unrolled():
        h = c = np.zeros((2, n))
        caches = []
        for t in range(3):
            h, c, cache = lstm_cell(xs[t], h, c, wx, wh, b)
            caches.append(cache)
        return h, caches

    _, caches = unrolled()
    dh, dc = r, np.zeros((2, n))
    g = [np.zeros_like(wx), np.zeros_like(wh), np.zeros_like(b)]
    for t in reversed(range(3)):
        _, dh, dc, a, bb, cc = lstm_cell_backward(dh, dc, caches[t], wx, wh)
        g[0] += a
        g[1] += bb
        g[2] += cc
    loss = lambda: float(np.sum(unrolled()[0] * r))  # noqa: E731
    errs["lstm cell x3"] = max(rel_error(ga, numeric_grad(loss, p)) for ga, p in zip(g, (wx, wh, b)))

    # full two-layer Bi-LSTM, 4 frames x 8 mels
    lstm = init_bilstm(1, input_size=8, hidden=3)
    seq = rng.standard_normal((4, 2, 8))
    mask = np.ones((4, 2))
    mask[3, 1] = 0
    rr = rng.standard_normal((2, 6))
    summary, cache = bilstm_forward(lstm, seq, mask)
    grads, _ = bilstm_backward(lstm, rr, cache)
    bl = lambda: float(np.sum(bilstm_forward(lstm, seq, mask)[0] * rr))  # noqa: E731
    errs["bi-lstm"] = max(rel_error(grads[k], numeric_grad(bl, lstm.tensors[k])) for k in grads)

    # autoencoder
    ae = init_autoencoder(2, dims=(6, 5, 3))
    for k in ae:
        if k.endswith(".b"):
            ae[k] = 0.1 * rng.standard_normal(ae[k].shape)
    x = rng.standard_normal((4, 6))
    _, ag = ae_loss_and_grads(ae, x)
    errs["autoencoder"] = max(
        rel_error(ag[k], numeric_grad(lambda: reconstruction_loss(ae, x), ae[k])) for k in ag)

    # both heads
    for variant in ("logistic", "mlp"):
        head = init_head(variant, 3, in_dim=6, hidden=4)
        head.tensors["out.b"] = 0.1 * rng.standard_normal((1, 2))
        hx = rng.standard_normal((5, 6))
        hy = [0, 1, 1, 0, 1]
        lg, hc = head_forward(head, hx)
        hg, _ = head_backward(head, xent_softmax(lg, hy)[1], hc)
        hl = lambda: xent_softmax(head_forward(head, hx)[0], hy)[0]  # noqa: E731
        errs[f"{variant} head"] = max(rel_error(hg[k], numeric_grad(hl, head.tensors[k])) for k in hg)
    return errs


def test_5_gradient_checks():
    start = time.perf_counter()
    errs = _gradient_errors(np.random.default_rng(SEED + 5))
    elapsed = time.perf_counter() - start
    worst = max(errs.values())
    detail = ", ".join(f"{k} {v:.1e}" for k, v in errs.items())
    verdict(5, worst < 1e-5 and elapsed < 30.0,
            f"max relative error {worst:.1e} (limit 1e-5) in {elapsed:.1f} s [{detail}]")


# ---------------------------------------------------------------- 6-8: end to end


@pytest.fixture(scope="module")
def trained(tmp_path_factory):
    """Synthesize the default 400-utterance corpus, train, and evaluate."""
    root = tmp_path_factory.mktemp("e2e")
    start = time.perf_counter()
    assert cli.main(["synth", "--out", str(root / "corpus"), "--seed", "0"]) == 0
    manifest = str(root / "corpus" / "manifest.csv")
    assert cli.main(["train", "--manifest", manifest, "--models", str(root / "m1"), "--seed", "0"]) == 0
    eers = {}
    for kind in ("stdc", "sdc"):
        assert cli.main(["eval", "--manifest", manifest, "--models", str(root / "m1"),
                         "--kind", kind, "--out", str(root / "r1")]) == 0
        eers[kind] = report_eer(root / "r1" / f"{kind}_eval_report.txt")
    elapsed = time.perf_counter() - start
    return root, manifest, eers, elapsed


def report_eer(path):
    fields = dict(line.split(" = ") for line in path.read_text().splitlines() if " = " in line)
    return float(fields["eer"])


@pytest.mark.slow
def test_6_training_is_deterministic(trained):
    root, manifest, _, _ = trained
    assert cli.main(["train", "--manifest", manifest, "--models", str(root / "m2"), "--seed", "0"]) == 0
    assert cli.main(["eval", "--manifest", manifest, "--models", str(root / "m2"),
                     "--kind", "stdc", "--out", str(root / "r2")]) == 0
    names = sorted(p.name for p in (root / "m1").iterdir())
    model_diff = [n for n in names if not filecmp.cmp(root / "m1" / n, root / "m2" / n, shallow=False)]
    reports = sorted(p.name for p in (root / "r2").iterdir())
    report_diff = [n for n in reports if not filecmp.cmp(root / "r1" / n, root / "r2" / n, shallow=False)]
    verdict(6, not model_diff and not report_diff and len(names) >= 7,
            f"{len(names) - len(model_diff)}/{len(names)} model files and "
            f"{len(reports) - len(report_diff)}/{len(reports)} report files byte-identical")


@pytest.mark.slow
def test_7_synthetic_end_to_end(trained):
    _, _, eers, elapsed = trained
    stdc, sdc = eers["stdc"], eers["sdc"]
    ok = stdc <= 0.10 and stdc <= sdc + 0.02 and elapsed <= 600
    verdict(7, ok, f"STDC+MLP eval EER {stdc:.3f} (limit 0.10), SDC-only {sdc:.3f}, "
                   f"synth+train+eval {elapsed:.0f} s (limit 600 s)")


@pytest.mark.slow
def test_8_dimensionality_contracts(trained):
    root, manifest, _, _ = trained
    entries, base = P.manifest_with_base(manifest)
    config = P.PipelineConfig(model_dir=str(root / "m1"))
    shapes = {k: P.extract_features(entries, base, config, k).vectors.shape for k in ("sdc", "stc", "stdc")}
    ok = all(s == (len(entries), 128) for s in shapes.values())
    verdict(8, ok, ", ".join(f"{k} {s}" for k, s in shapes.items()))


# ---------------------------------------------------------------- 9: hygiene


def test_9_pipeline_hygiene(tmp_path):
    rng = np.random.default_rng(SEED + 9)
    ff = P.FeatureFile("stdc", rng.standard_normal((5, 128)).astype(np.float32), [f"u{i}" for i in range(5)])
    P.write_features(tmp_path / "f.bin", ff)
    back = P.read_features(tmp_path / "f.bin")
    round_trip = back.kind == ff.kind and back.ids == ff.ids and np.array_equal(back.vectors, ff.vectors)

    config = P.PipelineConfig()
    silent = P.spectrogram(P.prepare_audio(AudioBuffer(np.zeros(16000), 16000), config), config)
    silence = bool(np.all(sdc_features(silent) == 0))

    bad_lengths = 0
    for _ in range(50):
        x = rng.uniform(-1, 1, int(rng.integers(100, 20000)))
        for kind in AugmentKind:
            bad_lengths += apply_augment(AudioBuffer(x, 16000), random_spec(rng, kind)).samples.size != x.size
    verdict(9, round_trip and silence and bad_lengths == 0,
            f"feature round trip {'exact' if round_trip else 'broken'}, silence SDC "
            f"{'all zero' if silence else 'nonzero'}, {50 * len(AugmentKind) - bad_lengths}/"
            f"{50 * len(AugmentKind)} augmentations length-preserving")
