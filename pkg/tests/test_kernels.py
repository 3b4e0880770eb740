import numpy as np
import pytest

from numerics.kernels import (conv1d_forward, cosine, cosine_matrix, global_stat_pool, layer_norm, median_filter,
                              memory_block, shift_time, sigmoid, softmax, windowed_stat_pool, check_finite)
from utils.errors import ConfigError, NumericError


def test_softmax_rows_sum_to_one_and_survive_large_inputs():
    p = softmax(np.array([[1000.0, 1000.0], [0.0, np.log(3.0)]]))
    np.testing.assert_allclose(p, [[0.5, 0.5], [0.25, 0.75]])


def test_sigmoid_values():
    np.testing.assert_allclose(sigmoid(np.array([0.0, -800.0, 800.0])), [0.5, 0.0, 1.0])


def test_layer_norm_zero_mean_unit_variance(rng):
    x = rng.normal(size=(4, 7)) * 3 + 2
    y = layer_norm(x, np.ones(7), np.zeros(7))
    np.testing.assert_allclose(y.mean(axis=1), 0.0, atol=1e-12)
    np.testing.assert_allclose(y.var(axis=1), 1.0, atol=1e-6)


def test_cosine_values_and_degenerate_flag():
    assert cosine(np.array([1.0, 0.0]), np.array([2.0, 0.0])) == pytest.approx(1.0)
    assert cosine(np.array([1.0, 0.0]), np.array([0.0, 3.0])) == pytest.approx(0.0)
    assert cosine(np.zeros(3), np.ones(3), with_flag=True) == (0.0, True)
    value, flag = cosine(np.ones(3), -np.ones(3), with_flag=True)
    assert value == pytest.approx(-1.0) and not flag


def test_cosine_matrix_zero_rows_give_zero(rng):
    A = rng.normal(size=(3, 4))
    A[1] = 0.0
    B = rng.normal(size=(5, 4))
    S, _ = cosine_matrix(A, B)
    assert S.shape == (3, 5)
    np.testing.assert_array_equal(S[1], 0.0)
    assert np.all(np.abs(S) <= 1.0 + 1e-12)


def test_stat_pooling():
    x = np.array([[1.0], [3.0], [5.0], [7.0]])
    pooled = global_stat_pool(x, eps=0.0)
    np.testing.assert_allclose(pooled, [4.0, np.sqrt(5.0)])
    win = windowed_stat_pool(x, 3, eps=0.0)
    # first frame only sees frames 0 and 1
    np.testing.assert_allclose(win[0], [2.0, 1.0])
    np.testing.assert_allclose(win[1], [3.0, np.sqrt(8.0 / 3.0)])


def test_shift_time():
    x = np.arange(4.0)[:, None]
    np.testing.assert_array_equal(shift_time(x, 1)[:, 0], [0, 0, 1, 2])
    np.testing.assert_array_equal(shift_time(x, -2)[:, 0], [2, 3, 0, 0])
    np.testing.assert_array_equal(shift_time(x, 5), np.zeros_like(x))


def test_memory_block_matches_loop_oracle(rng):
    T, d, L1, L2 = 7, 3, 2, 2
    zbar = rng.normal(size=(T, d))
    a = rng.normal(size=(L1 + 1, d))
    c = rng.normal(size=(L2, d))
    expected = np.zeros((T, d))
    for t in range(T):
        for i in range(L1 + 1):
            if t - i >= 0:
                expected[t] += a[i] * zbar[t - i]
        for j in range(1, L2 + 1):
            if t + j < T:
                expected[t] += c[j - 1] * zbar[t + j]
    np.testing.assert_allclose(memory_block(zbar, a, c), expected)


def test_conv_same_length_and_identity_kernel(rng):
    x = rng.normal(size=(5, 2))
    W = np.zeros((3, 2, 2))
    W[1] = np.eye(2)
    y, _ = conv1d_forward(x, W, np.zeros(2))
    np.testing.assert_allclose(y, x)


def test_median_filter_removes_isolated_blip():
    np.testing.assert_array_equal(median_filter(np.array([0, 1, 0, 0, 0]), 3), np.zeros(5))
    np.testing.assert_array_equal(median_filter(np.array([1, 1, 0, 1, 1]), 3), np.ones(5))


def test_median_filter_keeps_constant_and_rejects_even_window():
    np.testing.assert_array_equal(median_filter(np.ones(6), 5), np.ones(6))
    with pytest.raises(ConfigError):
        median_filter(np.ones(6), 4)


def test_check_finite():
    with pytest.raises(NumericError):
        check_finite(np.array([1.0, np.nan]), "x")


def test_windowed_std_survives_large_offset(rng):
    x = 1e8 + 1e-3 * rng.normal(size=(40, 2))
    pooled = windowed_stat_pool(x, 5, eps=0.0)
    for t in (0, 17, 39):
        window = x[max(0, t - 2):t + 3]
        np.testing.assert_allclose(pooled[t, 2:], window.std(axis=0), rtol=1e-6)
        np.testing.assert_allclose(pooled[t, :2], window.mean(axis=0), rtol=1e-12)
