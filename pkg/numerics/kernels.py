"""
Dense float64 kernels with hand-written backward passes.

Each forward that takes part in training returns what its backward needs;
backward functions take the upstream gradient first.
"""

import logging
from typing import Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from utils.errors import ConfigError, NumericError, ShapeError

logger = logging.getLogger(__name__)

DEGENERATE_NORM = 1e-12


def affine(x: np.ndarray, W: np.ndarray, b: np.ndarray) -> np.ndarray:
    if x.shape[-1] != W.shape[0] or b.shape[-1] != W.shape[1]:
        raise ShapeError("affine dimension mismatch", x.shape, W.shape, b.shape)
    return x @ W + b


def affine_backward(dy: np.ndarray, x: np.ndarray, W: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradients (dx, dW, db); leading batch axes of x are summed over"""
    x2 = x.reshape(-1, x.shape[-1])
    dy2 = dy.reshape(-1, dy.shape[-1])
    return dy @ W.T, x2.T @ dy2, dy2.sum(axis=0)


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def relu_backward(dy: np.ndarray, x: np.ndarray) -> np.ndarray:
    return dy * (x > 0)


def sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def softmax(v: np.ndarray, axis: int = -1) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    shifted = v - v.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=axis, keepdims=True)


def softmax_backward(dy: np.ndarray, y: np.ndarray, axis: int = -1) -> np.ndarray:
    return y * (dy - (dy * y).sum(axis=axis, keepdims=True))


def layer_norm(x: np.ndarray, gain: np.ndarray, bias: np.ndarray, eps: float = 1e-8) -> np.ndarray:
    return layer_norm_forward(x, gain, bias, eps)[0]


def layer_norm_forward(x, gain, bias, eps=1e-8):
    if gain.shape[-1] != x.shape[-1] or bias.shape[-1] != x.shape[-1]:
        raise ShapeError("layer norm gain/bias length must equal cols", x.shape, gain.shape)
    mu = x.mean(axis=-1, keepdims=True)
    var = ((x - mu) ** 2).mean(axis=-1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + eps)
    xhat = (x - mu) * inv_std
    return xhat * gain + bias, (xhat, inv_std)


def layer_norm_backward(dy, cache, gain):
    xhat, inv_std = cache
    dxhat = dy * gain
    dx = inv_std * (dxhat - dxhat.mean(axis=-1, keepdims=True)
                    - xhat * (dxhat * xhat).mean(axis=-1, keepdims=True))
    dgain = (dy * xhat).reshape(-1, xhat.shape[-1]).sum(axis=0)
    dbias = dy.reshape(-1, dy.shape[-1]).sum(axis=0)
    return dx, dgain, dbias


def cosine(u: np.ndarray, v: np.ndarray, with_flag: bool = False):
    """Cosine similarity; degenerate (near-zero) inputs give 0 and raise the flag"""
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu < DEGENERATE_NORM or nv < DEGENERATE_NORM:
        return (0.0, True) if with_flag else 0.0
    value = float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))
    return (value, False) if with_flag else value


def _unit_rows(A: np.ndarray):
    norms = np.linalg.norm(A, axis=-1, keepdims=True)
    ok = norms >= DEGENERATE_NORM
    unit = np.where(ok, A / np.where(ok, norms, 1.0), 0.0)
    return unit, norms, ok


def cosine_matrix(A: np.ndarray, B: np.ndarray):
    """Pairwise row cosines (rows(A) x rows(B)) plus the cache for the backward pass"""
    if A.shape[-1] != B.shape[-1]:
        raise ShapeError("cosine operands differ in width", A.shape, B.shape)
    Au, An, Aok = _unit_rows(A)
    Bu, Bn, Bok = _unit_rows(B)
    return Au @ Bu.T, (Au, An, Aok, Bu, Bn, Bok)


def cosine_matrix_backward(dS: np.ndarray, cache):
    Au, An, Aok, Bu, Bn, Bok = cache

    def through_norm(dU, U, norms, ok):
        radial = (dU * U).sum(axis=-1, keepdims=True)
        return np.where(ok, (dU - U * radial) / np.where(ok, norms, 1.0), 0.0)

    dA = through_norm(dS @ Bu, Au, An, Aok)
    dB = through_norm(dS.T @ Au, Bu, Bn, Bok)
    return dA, dB


def _window_sum(x: np.ndarray, half: int) -> np.ndarray:
    """Sum over rows [t-half, t+half] clipped to [0, T)"""
    T = x.shape[0]
    csum = np.concatenate([np.zeros((1,) + x.shape[1:]), np.cumsum(x, axis=0)], axis=0)
    idx = np.arange(T)
    lo = np.clip(idx - half, 0, T)
    hi = np.clip(idx + half + 1, 0, T)
    return csum[hi] - csum[lo]


def windowed_stat_pool(x: np.ndarray, l: int, eps: float = 1e-8) -> np.ndarray:
    return windowed_stat_pool_forward(x, l, eps)[0]


def windowed_stat_pool_forward(x: np.ndarray, l: int, eps: float = 1e-8):
    """Per-frame [mean, std] over the symmetric window of half-width l // 2"""
    if l < 1:
        raise ConfigError(f"pooling window must be >= 1, got {l}")
    T = x.shape[0]
    half = l // 2
    count = _window_sum(np.ones((T, 1)), half)
    # statistics are taken about the column mean so large offsets do not cancel
    shift = x.mean(axis=0, keepdims=True) if T else np.zeros((1, x.shape[1]))
    xc = x - shift
    mean_c = _window_sum(xc, half) / count
    var = np.maximum(_window_sum(xc * xc, half) / count - mean_c * mean_c, 0.0)
    std = np.sqrt(var + eps)
    mean = mean_c + shift
    return np.concatenate([mean, std], axis=1), (xc, half, count, mean_c, std)


def windowed_stat_pool_backward(dy: np.ndarray, cache) -> np.ndarray:
    xc, half, count, mean_c, std = cache
    F = xc.shape[1]
    dmean, dstd = dy[:, :F], dy[:, F:]
    a = dmean / count
    b = dstd / (2.0 * std) / count
    return _window_sum(a, half) + 2.0 * xc * _window_sum(b, half) - 2.0 * _window_sum(b * mean_c, half)


def global_stat_pool(x: np.ndarray, eps: float = 1e-8) -> np.ndarray:
    return windowed_stat_pool(x, 2 * x.shape[0] + 1, eps)[0]


def conv1d_forward(x: np.ndarray, W: np.ndarray, b: np.ndarray):
    """Stride-1 'same' convolution over time. x: T x Cin, W: k x Cin x Cout (k odd)"""
    k, cin, cout = W.shape
    if x.shape[1] != cin:
        raise ShapeError("conv input channels", x.shape, W.shape)
    pad = k // 2
    xp = np.pad(x, ((pad, pad), (0, 0)))
    cols = sliding_window_view(xp, k, axis=0)            # T x Cin x k
    cols = cols.transpose(0, 2, 1).reshape(x.shape[0], k * cin)
    return cols @ W.reshape(k * cin, cout) + b, cols


def conv1d_backward(dy: np.ndarray, cols: np.ndarray, W: np.ndarray):
    k, cin, cout = W.shape
    T = dy.shape[0]
    dW = (cols.T @ dy).reshape(k, cin, cout)
    db = dy.sum(axis=0)
    dcols = (dy @ W.reshape(k * cin, cout).T).reshape(T, k, cin)
    pad = k // 2
    dxp = np.zeros((T + 2 * pad, cin))
    for j in range(k):
        dxp[j:j + T] += dcols[:, j, :]
    return dxp[pad:pad + T], dW, db


def shift_time(x: np.ndarray, k: int) -> np.ndarray:
    """out[t] = x[t - k] with zeros outside [0, T)"""
    T = x.shape[0]
    out = np.zeros_like(x)
    if abs(k) >= T:
        return out
    if k >= 0:
        out[k:] = x[:T - k]
    else:
        out[:T + k] = x[-k:]
    return out


def memory_block(zbar: np.ndarray, a: np.ndarray, c: np.ndarray) -> np.ndarray:
    """z[t] = sum_i a[i] * zbar[t-i] + sum_j c[j-1] * zbar[t+j], zero padded"""
    z = np.zeros_like(zbar)
    for i in range(a.shape[0]):
        z += a[i] * shift_time(zbar, i)
    for j in range(1, c.shape[0] + 1):
        z += c[j - 1] * shift_time(zbar, -j)
    return z


def memory_block_backward(dz: np.ndarray, zbar: np.ndarray, a: np.ndarray, c: np.ndarray):
    dzbar = np.zeros_like(zbar)
    da = np.zeros_like(a)
    dc = np.zeros_like(c)
    for i in range(a.shape[0]):
        dzbar += a[i] * shift_time(dz, -i)
        da[i] = (dz * shift_time(zbar, i)).sum(axis=0)
    for j in range(1, c.shape[0] + 1):
        dzbar += c[j - 1] * shift_time(dz, j)
        dc[j - 1] = (dz * shift_time(zbar, -j)).sum(axis=0)
    return dzbar, da, dc


def median_filter(seq: np.ndarray, window: int) -> np.ndarray:
    """
    Lower median over the window centred on each position, clipped at the
    sequence ends (edge windows are shorter, never padded).
    """
    if window < 1 or window % 2 == 0:
        raise ConfigError(f"median window must be an odd count >= 1, got {window}")
    seq = np.asarray(seq, dtype=np.float64)
    if window == 1 or seq.size == 0:
        return seq.copy()
    half = window // 2
    padded = np.pad(seq, half, constant_values=np.nan)
    windows = np.sort(sliding_window_view(padded, window), axis=1)   # NaNs sort last
    valid = (~np.isnan(windows)).sum(axis=1)
    return np.take_along_axis(windows, ((valid - 1) // 2)[:, None], axis=1)[:, 0]


def check_finite(x: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(x)):
        raise NumericError(f"non-finite values in {what}")
    return x
