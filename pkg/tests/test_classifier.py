import numpy as np
import pytest

from gradcheck import numeric_grad, rel_error
from stdc.classifier import (
    BONA_FIDE,
    SPOOF,
    HeadParams,
    head_backward,
    head_forward,
    init_head,
    predict,
    score,
    train_head,
)
from stdc.errors import EmptyTrainingSet, ShapeMismatch, SingleClassData
from stdc.tensorcore import xent_softmax


def separable(n=256, seed=0):
    rng = np.random.default_rng(seed)
    y = np.arange(n) % 2
    x = np.zeros((n, 128))
    x[:, :2] = rng.normal(0, 0.3, (n, 2)) + np.where(y[:, None] == BONA_FIDE, 1.5, -1.5)
    return x, y


def test_mlp_separates_toy_set():
    x, y = separable()
    params = train_head(x, y, "mlp", seed=1)
    assert np.mean(predict(x, params) == y) == 1.0


def test_mlp_separates_flipped_labels():
    x, y = separable()
    params = train_head(x, 1 - y, "mlp", seed=1)
    assert np.mean(predict(x, params) == 1 - y) == 1.0


@pytest.mark.parametrize("flip", [False, True])
def test_logistic_separates_toy_set(flip):
    # a linear head cannot undo an unlucky init in 100 steps of 1e-4
    x, y = separable()
    y = 1 - y if flip else y
    params = train_head(x, y, "logistic", seed=1, lr=1e-2)
    assert np.mean(predict(x, params) == y) == 1.0


@pytest.mark.parametrize("variant", ["logistic", "mlp"])
def test_same_seed_same_params(variant):
    x, y = separable(64)
    a = train_head(x, y, variant, seed=4, epochs=3)
    b = train_head(x, y, variant, seed=4, epochs=3)
    assert all(np.array_equal(a.tensors[k], b.tensors[k]) for k in a.tensors)


def test_zero_weights_score_zero(rng):
    params = init_head("mlp", 0)
    params.tensors = {k: np.zeros_like(v) for k, v in params.tensors.items()}
    assert np.all(score(rng.standard_normal((5, 128)), params) == 0)


def test_bona_bias_shifts_score(rng):
    params = init_head("logistic", 0)
    x = rng.standard_normal((6, 128))
    before = score(x, params)
    params.tensors["out.b"][0, BONA_FIDE] += 0.75
    np.testing.assert_allclose(score(x, params) - before, 0.75, atol=1e-12)


@pytest.mark.parametrize("variant", ["logistic", "mlp"])
def test_scores_finite(rng, variant):
    s = score(rng.standard_normal((1000, 128)) * 10, init_head(variant, 3))
    assert s.shape == (1000,) and np.all(np.isfinite(s))


@pytest.mark.parametrize("variant", ["logistic", "mlp"])
def test_swapping_output_rows_negates_scores(rng, variant):
    params = init_head(variant, 2)
    params.tensors["out.b"] = rng.standard_normal((1, 2))
    x = rng.standard_normal((20, 128))
    s = score(x, params)
    swapped = HeadParams(variant, {k: v.copy() for k, v in params.tensors.items()})
    swapped.tensors["out.w"] = swapped.tensors["out.w"][:, ::-1].copy()
    swapped.tensors["out.b"] = swapped.tensors["out.b"][:, ::-1].copy()
    assert np.array_equal(score(x, swapped), -s)


@pytest.mark.parametrize("variant", ["logistic", "mlp"])
def test_head_gradients(rng, variant):
    params = init_head(variant, 5, in_dim=6, hidden=4)
    params.tensors["out.b"] = 0.1 * rng.standard_normal((1, 2))
    if variant == "mlp":
        params.tensors["hid.b"] = 0.1 * rng.standard_normal((1, 4))
    x = rng.standard_normal((5, 6))
    labels = [0, 1, 1, 0, 1]

    def loss():
        return xent_softmax(head_forward(params, x)[0], labels)[0]

    logits, cache = head_forward(params, x)
    _, dlogits = xent_softmax(logits, labels)
    grads, dx = head_backward(params, dlogits, cache)
    assert set(grads) == set(params.tensors)
    for name, g in grads.items():
        assert rel_error(g, numeric_grad(loss, params.tensors[name])) < 1e-5, name
    assert rel_error(dx, numeric_grad(loss, x)) < 1e-5


def test_training_errors():
    x = np.zeros((4, 128))
    with pytest.raises(SingleClassData):
        train_head(x, [SPOOF] * 4)
    with pytest.raises(EmptyTrainingSet):
        train_head(np.zeros((0, 128)), [])
    with pytest.raises(ShapeMismatch):
        head_forward(init_head("mlp", 0), np.zeros((2, 5)))
