import numpy as np
import pytest

from numerics.gradcheck import grad_check, relative_error
from numerics.kernels import (affine, affine_backward, cosine_matrix, cosine_matrix_backward, layer_norm_backward,
                              layer_norm_forward, memory_block, memory_block_backward, softmax, softmax_backward,
                              windowed_stat_pool_backward, windowed_stat_pool_forward, conv1d_forward,
                              conv1d_backward)
from utils.errors import ConfigError, GradCheckError


def _weights(shape, seed):
    return np.random.default_rng(seed).normal(size=shape)


def test_relative_error_floor():
    assert relative_error(0.0, 0.0) == 0.0
    assert relative_error(1.0, 1.1) == pytest.approx(0.1 / 1.1)


def test_step_outside_range_rejected():
    with pytest.raises(ConfigError):
        grad_check(lambda p: (0.0, {}), {"w": np.zeros(2)}, h=1e-2)


def test_affine_and_softmax():
    w = _weights((4, 3), 1)

    def loss(p):
        x = _weights((5, 4), 2)
        y = softmax(affine(x, p["W"], p["b"]))
        out = float((y * w[:3, :].sum(axis=0)).sum())
        dy = np.broadcast_to(w[:3, :].sum(axis=0), y.shape)
        dz = softmax_backward(dy, y)
        _, dW, db = affine_backward(dz, x, p["W"])
        return out, {"W": dW, "b": db}

    report = grad_check(loss, {"W": _weights((4, 3), 3), "b": _weights(3, 4)})
    assert report.passed, report.worst


def test_layer_norm():
    target = _weights((3, 6), 5)

    def loss(p):
        y, cache = layer_norm_forward(p["x"], p["g"], p["b"])
        dx, dg, db = layer_norm_backward(target, cache, p["g"])
        return float((y * target).sum()), {"x": dx, "g": dg, "b": db}

    report = grad_check(loss, {"x": _weights((3, 6), 6), "g": _weights(6, 7), "b": _weights(6, 8)})
    assert report.passed, report.worst


def test_cosine_matrix():
    target = _weights((3, 4), 9)

    def loss(p):
        S, cache = cosine_matrix(p["A"], p["B"])
        dA, dB = cosine_matrix_backward(target, cache)
        return float((S * target).sum()), {"A": dA, "B": dB}

    report = grad_check(loss, {"A": _weights((3, 5), 10), "B": _weights((4, 5), 11)})
    assert report.passed, report.worst


def test_windowed_pooling():
    target = _weights((6, 4), 12)

    def loss(p):
        y, cache = windowed_stat_pool_forward(p["x"], 3)
        return float((y * target).sum()), {"x": windowed_stat_pool_backward(target, cache)}

    report = grad_check(loss, {"x": _weights((6, 2), 13)})
    assert report.passed, report.worst


def test_conv_and_memory_block():
    target = _weights((6, 3), 14)

    def loss(p):
        h, cols = conv1d_forward(p["x"], p["W"], p["b"])
        z = memory_block(h, p["a"], p["c"])
        dh, da, dc = memory_block_backward(target, h, p["a"], p["c"])
        dx, dW, db = conv1d_backward(dh, cols, p["W"])
        return float((z * target).sum()), {"x": dx, "W": dW, "b": db, "a": da, "c": dc}

    params = {"x": _weights((6, 2), 15), "W": _weights((3, 2, 3), 16), "b": _weights(3, 17),
              "a": _weights((3, 3), 18), "c": _weights((2, 3), 19)}
    report = grad_check(loss, params)
    assert report.passed, report.worst


def test_wrong_gradient_is_detected():
    def loss(p):
        return float((p["w"] ** 2).sum()), {"w": 3.0 * p["w"]}

    report = grad_check(loss, {"w": _weights(4, 20)})
    assert not report.passed
    assert report.max_rel_err > 0.1


def test_kinks_are_skipped_not_failed():
    def loss(p):
        w = p["w"]
        return float(np.abs(w).sum()), {"w": np.sign(w)}

    report = grad_check(loss, {"w": np.array([0.0, 1.0, -2.0])}, kink_tol=1e-4)
    assert report.skipped == 1
    assert report.checked == 2
    assert report.passed


def test_non_finite_loss_reports_tensor_and_flat_index():
    def loss_fn(p):
        with np.errstate(invalid="ignore", divide="ignore"):
            root = np.sqrt(p["w"])
        return float(root.sum() + (p["a"] ** 2).sum()), {"w": 0.5 / root, "a": 2.0 * p["a"]}

    params = {"a": np.array([1.0, 2.0]), "w": np.array([1.0, 2.0, 5e-6])}
    with pytest.raises(GradCheckError) as info:
        grad_check(loss_fn, params, h=1e-5)
    assert info.value.name == "w"
    assert info.value.index == 2
