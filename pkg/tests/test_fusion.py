import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gradcheck import numeric_grad, rel_error
from stdc.errors import EmptyTrainingSet, ShapeMismatch, StatsNotFitted, TooFewVectors
from stdc.fusion import (
    NormStats,
    ae_loss_and_grads,
    denormalize,
    encode_stdc,
    fit_norm,
    init_autoencoder,
    normalize,
    reconstruction_loss,
    train_autoencoder,
)


def test_fit_norm_two_vectors():
    a = np.zeros(256)
    b = np.zeros(256)
    b[:10] = 2.0
    stats = fit_norm([a, b])
    assert np.all(stats.mean[:10] == 1.0) and np.all(stats.std[:10] == 1.0)


def test_constant_dimension_is_floored():
    x = np.ones((5, 256))
    x[:, 0] = np.arange(5)
    stats = fit_norm(x)
    assert np.all(stats.std[1:] == 1e-6)
    z = normalize(x, stats)
    assert np.all(z[:, 1:] == 0)


def test_normalized_batch_moments(rng):
    x = rng.standard_normal((50, 256)) * rng.uniform(0.1, 10, 256) + rng.uniform(-5, 5, 256)
    z = normalize(x, fit_norm(x))
    assert np.max(np.abs(z.mean(axis=0))) < 1e-9
    assert np.max(np.abs(z.std(axis=0) - 1)) < 1e-9


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 30))
def test_normalize_round_trip(seed, n):
    x = np.random.default_rng(seed).standard_normal((n, 256)) * 3 + 1
    stats = fit_norm(x)
    np.testing.assert_allclose(denormalize(normalize(x, stats), stats), x, atol=1e-9)


def test_norm_errors():
    with pytest.raises(TooFewVectors):
        fit_norm(np.zeros((1, 256)))
    with pytest.raises(StatsNotFitted):
        normalize(np.zeros(256), None)
    with pytest.raises(ShapeMismatch):
        normalize(np.zeros(10), fit_norm(np.zeros((2, 256))))


def test_norm_tensor_round_trip(rng):
    stats = fit_norm(rng.standard_normal((4, 256)))
    back = NormStats.from_tensors(stats.to_tensors())
    assert np.array_equal(back.mean, stats.mean) and np.array_equal(back.std, stats.std)


# ---------------------------------------------------------------- autoencoder


def test_zero_encoder_gives_zero_code(rng):
    params = {k: np.zeros_like(v) for k, v in init_autoencoder(0).items()}
    stats = fit_norm(rng.standard_normal((5, 256)))
    code = encode_stdc(rng.standard_normal(128), rng.standard_normal(128), stats, params)
    assert code.shape == (128,) and np.all(code == 0)


def test_encode_shape_and_determinism(rng):
    params = init_autoencoder(3)
    stats = fit_norm(rng.standard_normal((5, 256)))
    sdc, stc = rng.standard_normal((7, 128)), rng.standard_normal((7, 128))
    codes = encode_stdc(sdc, stc, stats, params)
    assert codes.shape == (7, 128)
    assert np.array_equal(codes, encode_stdc(sdc, stc, stats, params))
    np.testing.assert_allclose(encode_stdc(sdc[2], stc[2], stats, params), codes[2], atol=1e-12)


def test_autoencoder_gradient(rng):
    params = init_autoencoder(1, dims=(6, 5, 3))
    for k in params:
        if k.endswith(".b"):
            params[k] = 0.1 * rng.standard_normal(params[k].shape)
    x = rng.standard_normal((4, 6))
    _, grads = ae_loss_and_grads(params, x)
    for name, g in grads.items():
        num = numeric_grad(lambda: reconstruction_loss(params, x), params[name])
        assert rel_error(g, num) < 1e-5, name


def test_training_decreases_loss(rng):
    x = rng.standard_normal((100, 256))
    params = init_autoencoder(0)
    history = []
    # 100 vectors in batches of 32 is 4 steps per epoch: 50 epochs = 200 steps
    train_autoencoder(x, params, seed=0, epochs=50, history=history)
    assert history[-1] < history[0]


def test_identical_vectors_are_reconstructed(rng):
    v = rng.standard_normal(256)
    x = np.tile(v, (100, 1))
    params = train_autoencoder(x, init_autoencoder(2), seed=0)
    assert reconstruction_loss(params, x) < 1e-2 * float(v @ v)


def test_training_deterministic(rng):
    x = rng.standard_normal((40, 256))
    a = train_autoencoder(x, init_autoencoder(5), seed=11, epochs=5)
    b = train_autoencoder(x, init_autoencoder(5), seed=11, epochs=5)
    assert all(np.array_equal(a[k], b[k]) for k in a)


def test_empty_training_set():
    with pytest.raises(EmptyTrainingSet):
        train_autoencoder(np.zeros((0, 256)), init_autoencoder(0), seed=0)
