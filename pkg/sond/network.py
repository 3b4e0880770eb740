"""
SOND forward and backward passes.

    X --speech encoder--> H (T x E)          V --speaker encoder--> Vbar (N x E)
    CI scores: cosine(Vbar[n], H[t])          CD scores: per-speaker attention stack
    SCN: [CI; CD] (T x 2N) -> (FF + LN + memory block) x L_SCN -> output layer

Every private *_forward returns (output, cache); the matching *_backward
consumes the cache and accumulates into a gradient dict keyed like Params.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np

from models.profiles import ProfileSet
from numerics.kernels import (
    affine, affine_backward, relu, relu_backward, sigmoid, softmax, softmax_backward,
    layer_norm_forward, layer_norm_backward, cosine_matrix, cosine_matrix_backward,
    windowed_stat_pool_forward, windowed_stat_pool_backward, global_stat_pool, conv1d_forward, conv1d_backward,
    memory_block, memory_block_backward, check_finite,
)
from sond.config import ModelConfig
from sond.params import Params, SPEECH_PREFIX
from utils.errors import NumericError, ShapeError

logger = logging.getLogger(__name__)

Grads = Dict[str, np.ndarray]


@dataclass
class ScoreTensor:
    """N x T speaker scores; CI in [-1, 1], CD in (0, 1)"""
    data: np.ndarray
    kind: str


@dataclass
class ForwardResult:
    logits: np.ndarray
    posteriors: np.ndarray
    ci: ScoreTensor
    cd: ScoreTensor
    H: np.ndarray
    Vbar: np.ndarray
    mask: np.ndarray
    cache: Dict[str, Any] = field(default_factory=dict)

    @property
    def scn_input(self) -> np.ndarray:
        """The T x 2N concatenation [CI | CD] fed to the speaker-combining network"""
        return np.concatenate([self.ci.data.T, self.cd.data.T], axis=1)


def _acc(grads: Grads, name: str, value: np.ndarray) -> None:
    if name in grads:
        grads[name] = grads[name] + value
    else:
        grads[name] = value


# ---------------------------------------------------------------- speech encoder

def _conv_stack(X: np.ndarray, p: Params, cfg: ModelConfig):
    h = X
    layers = []
    for i in range(len(cfg.conv_channels)):
        pre, cols = conv1d_forward(h, p[f"speech.conv{i}.W"], p[f"speech.conv{i}.b"])
        layers.append((cols, pre))
        h = relu(pre)
    return h, layers


def _speech_forward(X: np.ndarray, p: Params, cfg: ModelConfig):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != cfg.feat_dim:
        raise ShapeError(f"features must be T x {cfg.feat_dim}", X.shape)
    h, layers = _conv_stack(X, p, cfg)
    pooled, pool_cache = windowed_stat_pool_forward(h, cfg.pool_window, cfg.pool_eps)
    H = affine(pooled, p["speech.emb.W"], p["speech.emb.b"])
    if not np.all(np.isfinite(H)):
        raise NumericError("non-finite activations in speech encoder")
    return H, (layers, pool_cache, pooled)


def _speech_backward(dH: np.ndarray, cache, p: Params, cfg: ModelConfig, grads: Grads) -> None:
    layers, pool_cache, pooled = cache
    dpooled, dW, db = affine_backward(dH, pooled, p["speech.emb.W"])
    _acc(grads, "speech.emb.W", dW)
    _acc(grads, "speech.emb.b", db)
    dh = windowed_stat_pool_backward(dpooled, pool_cache)
    for i in reversed(range(len(layers))):
        cols, pre = layers[i]
        dh, dW, db = conv1d_backward(relu_backward(dh, pre), cols, p[f"speech.conv{i}.W"])
        _acc(grads, f"speech.conv{i}.W", dW)
        _acc(grads, f"speech.conv{i}.b", db)


# --------------------------------------------------------------- speaker encoder

def _speaker_forward(V: np.ndarray, p: Params, cfg: ModelConfig):
    if V.ndim != 2 or V.shape[1] != cfg.profile_dim:
        raise ShapeError(f"profiles must be N x {cfg.profile_dim}", V.shape)
    v = V
    inputs, pres = [], []
    for i in range(cfg.speaker_layers):
        inputs.append(v)
        pre = affine(v, p[f"speaker.fc{i}.W"], p[f"speaker.fc{i}.b"])
        pres.append(pre)
        v = relu(pre)
    return v, (inputs, pres)


def _speaker_backward(dVbar: np.ndarray, cache, p: Params, cfg: ModelConfig, grads: Grads) -> None:
    inputs, pres = cache
    dv = dVbar
    for i in reversed(range(cfg.speaker_layers)):
        dv, dW, db = affine_backward(relu_backward(dv, pres[i]), inputs[i], p[f"speaker.fc{i}.W"])
        _acc(grads, f"speaker.fc{i}.W", dW)
        _acc(grads, f"speaker.fc{i}.b", db)


# ------------------------------------------------------------------------ scorers

def _ci_forward(H: np.ndarray, Vbar: np.ndarray, mask: np.ndarray):
    if H.shape[1] != Vbar.shape[1]:
        raise ShapeError("speech and speaker encodings differ in width", H.shape, Vbar.shape)
    S, cache = cosine_matrix(Vbar, H)
    return np.where(mask[:, None], S, -1.0), (cache, mask)


def _ci_backward(dS: np.ndarray, cache):
    cos_cache, mask = cache
    dVbar, dH = cosine_matrix_backward(dS * mask[:, None], cos_cache)
    return dH, dVbar


def _split_heads(x: np.ndarray, heads: int) -> np.ndarray:
    T, A = x.shape
    return x.reshape(T, heads, A // heads).transpose(1, 0, 2)


def _merge_heads(x: np.ndarray) -> np.ndarray:
    heads, T, dh = x.shape
    return x.transpose(1, 0, 2).reshape(T, heads * dh)


def _mhsa_forward(z: np.ndarray, p: Params, prefix: str, cfg: ModelConfig):
    heads = cfg.attn_heads
    q = _split_heads(affine(z, p[f"{prefix}.wq"], p[f"{prefix}.bq"]), heads)
    k = _split_heads(affine(z, p[f"{prefix}.wk"], p[f"{prefix}.bk"]), heads)
    v = _split_heads(affine(z, p[f"{prefix}.wv"], p[f"{prefix}.bv"]), heads)
    scale = 1.0 / np.sqrt(cfg.head_dim)
    att = softmax(q @ k.transpose(0, 2, 1) * scale, axis=-1)
    o = _merge_heads(att @ v)
    return affine(o, p[f"{prefix}.wo"], p[f"{prefix}.bo"]), (z, q, k, v, att, o, scale)


def _mhsa_backward(dout: np.ndarray, cache, p: Params, prefix: str, cfg: ModelConfig, grads: Grads) -> np.ndarray:
    z, q, k, v, att, o, scale = cache
    do, dW, db = affine_backward(dout, o, p[f"{prefix}.wo"])
    _acc(grads, f"{prefix}.wo", dW)
    _acc(grads, f"{prefix}.bo", db)
    do = _split_heads(do, cfg.attn_heads)
    datt = do @ v.transpose(0, 2, 1)
    dv = att.transpose(0, 2, 1) @ do
    dscores = softmax_backward(datt, att) * scale
    dq = dscores @ k
    dk = dscores.transpose(0, 2, 1) @ q
    dz = np.zeros_like(z)
    for proj, d in (("q", dq), ("k", dk), ("v", dv)):
        dx, dW, db = affine_backward(_merge_heads(d), z, p[f"{prefix}.w{proj}"])
        _acc(grads, f"{prefix}.w{proj}", dW)
        _acc(grads, f"{prefix}.b{proj}", db)
        dz += dx
    return dz


def _cd_speaker_forward(H: np.ndarray, vbar: np.ndarray, p: Params, cfg: ModelConfig):
    """Attention stack over one speaker's sequence [(h_1, v), ..., (h_T, v)]"""
    z0 = np.concatenate([H, np.broadcast_to(vbar, H.shape)], axis=1)
    z = affine(z0, p["cd.in.W"], p["cd.in.b"])
    blocks = []
    for l in range(cfg.cd_layers):
        prefix = f"cd.l{l}"
        att, att_cache = _mhsa_forward(z, p, prefix, cfg)
        zbar = z + att
        f1 = affine(zbar, p[f"{prefix}.ff1.W"], p[f"{prefix}.ff1.b"])
        r = relu(f1)
        blocks.append((att_cache, zbar, f1, r))
        z = zbar + affine(r, p[f"{prefix}.ff2.W"], p[f"{prefix}.ff2.b"])
    s = sigmoid(affine(z, p["cd.out.W"], p["cd.out.b"])[:, 0])
    return s, (z0, blocks, z, s)


def _cd_speaker_backward(ds: np.ndarray, cache, p: Params, cfg: ModelConfig, grads: Grads):
    z0, blocks, z_last, s = cache
    dlogit = (ds * s * (1.0 - s))[:, None]
    dz, dW, db = affine_backward(dlogit, z_last, p["cd.out.W"])
    _acc(grads, "cd.out.W", dW)
    _acc(grads, "cd.out.b", db)
    for l in reversed(range(cfg.cd_layers)):
        prefix = f"cd.l{l}"
        att_cache, zbar, f1, r = blocks[l]
        dr, dW, db = affine_backward(dz, r, p[f"{prefix}.ff2.W"])
        _acc(grads, f"{prefix}.ff2.W", dW)
        _acc(grads, f"{prefix}.ff2.b", db)
        dzbar_ff, dW, db = affine_backward(relu_backward(dr, f1), zbar, p[f"{prefix}.ff1.W"])
        _acc(grads, f"{prefix}.ff1.W", dW)
        _acc(grads, f"{prefix}.ff1.b", db)
        dzbar = dz + dzbar_ff
        dz = dzbar + _mhsa_backward(dzbar, att_cache, p, prefix, cfg, grads)
    dz0, dW, db = affine_backward(dz, z0, p["cd.in.W"])
    _acc(grads, "cd.in.W", dW)
    _acc(grads, "cd.in.b", db)
    E = z0.shape[1] // 2
    return dz0[:, :E], dz0[:, E:].sum(axis=0)


def _cd_forward(H: np.ndarray, Vbar: np.ndarray, p: Params, cfg: ModelConfig, keep_cache: bool = True):
    if H.shape[1] != Vbar.shape[1]:
        raise ShapeError("speech and speaker encodings differ in width", H.shape, Vbar.shape)
    scores = np.empty((Vbar.shape[0], H.shape[0]))
    caches = []
    # speakers are scored independently of each other
    for n in range(Vbar.shape[0]):
        scores[n], cache = _cd_speaker_forward(H, Vbar[n], p, cfg)
        caches.append(cache if keep_cache else None)
    return scores, caches


def _cd_backward(dS: np.ndarray, caches, p: Params, cfg: ModelConfig, grads: Grads):
    dH = None
    dVbar = []
    for n, cache in enumerate(caches):
        dh, dv = _cd_speaker_backward(dS[n], cache, p, cfg, grads)
        dH = dh if dH is None else dH + dh
        dVbar.append(dv)
    return dH, np.stack(dVbar)


# ------------------------------------------------------ speaker-combining network

def _scn_forward(z: np.ndarray, p: Params, cfg: ModelConfig):
    layers = []
    for l in range(cfg.scn_layers):
        prefix = f"scn.l{l}"
        f1 = affine(z, p[f"{prefix}.ff1.W"], p[f"{prefix}.ff1.b"])
        normed, ln_cache = layer_norm_forward(relu(f1), p[f"{prefix}.ln.gain"], p[f"{prefix}.ln.bias"], cfg.ln_eps)
        zb = affine(normed, p[f"{prefix}.ff2.W"], p[f"{prefix}.ff2.b"])
        layers.append((z, f1, ln_cache, normed, zb))
        z = memory_block(zb, p[f"{prefix}.mem.a"], p[f"{prefix}.mem.c"])
    logits = affine(z, p["out.W"], p["out.b"])
    return logits, (layers, z)


def _scn_backward(dlogits: np.ndarray, cache, p: Params, cfg: ModelConfig, grads: Grads) -> np.ndarray:
    layers, z_last = cache
    dz, dW, db = affine_backward(dlogits, z_last, p["out.W"])
    _acc(grads, "out.W", dW)
    _acc(grads, "out.b", db)
    for l in reversed(range(cfg.scn_layers)):
        prefix = f"scn.l{l}"
        z, f1, ln_cache, normed, zb = layers[l]
        dzb, da, dc = memory_block_backward(dz, zb, p[f"{prefix}.mem.a"], p[f"{prefix}.mem.c"])
        _acc(grads, f"{prefix}.mem.a", da)
        _acc(grads, f"{prefix}.mem.c", dc)
        dnormed, dW, db = affine_backward(dzb, normed, p[f"{prefix}.ff2.W"])
        _acc(grads, f"{prefix}.ff2.W", dW)
        _acc(grads, f"{prefix}.ff2.b", db)
        dr, dgain, dbias = layer_norm_backward(dnormed, ln_cache, p[f"{prefix}.ln.gain"])
        _acc(grads, f"{prefix}.ln.gain", dgain)
        _acc(grads, f"{prefix}.ln.bias", dbias)
        dz, dW, db = affine_backward(relu_backward(dr, f1), z, p[f"{prefix}.ff1.W"])
        _acc(grads, f"{prefix}.ff1.W", dW)
        _acc(grads, f"{prefix}.ff1.b", db)
    return dz


def _output_activation(logits: np.ndarray, cfg: ModelConfig) -> np.ndarray:
    return softmax(logits, axis=-1) if cfg.output_head == "pse" else sigmoid(logits)


# ----------------------------------------------------------------------- public

def speech_encode(X: np.ndarray, p: Params, cfg: ModelConfig) -> np.ndarray:
    return _speech_forward(X, p, cfg)[0]


def speech_global_embedding(X: np.ndarray, p: Params, cfg: ModelConfig) -> np.ndarray:
    """
    One E-dim vector for a whole chunk: the speech encoder with its windowed
    pooling replaced by global statistic pooling.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != cfg.feat_dim or X.shape[0] < 1:
        raise ShapeError(f"features must be T x {cfg.feat_dim} with T >= 1", X.shape)
    h, _ = _conv_stack(X, p, cfg)
    pooled = global_stat_pool(h, cfg.pool_eps)
    return affine(pooled[None, :], p["speech.emb.W"], p["speech.emb.b"])[0]


def speaker_encode(V: ProfileSet, p: Params, cfg: ModelConfig) -> np.ndarray:
    vectors = V.vectors if isinstance(V, ProfileSet) else np.asarray(V, dtype=np.float64)
    return _speaker_forward(vectors, p, cfg)[0]


def ci_score(H: np.ndarray, Vbar: np.ndarray, mask: Optional[np.ndarray] = None) -> ScoreTensor:
    mask = np.ones(Vbar.shape[0], dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    return ScoreTensor(_ci_forward(H, Vbar, mask)[0], "CI")


def cd_score(H: np.ndarray, Vbar: np.ndarray, p: Params, cfg: ModelConfig) -> ScoreTensor:
    return ScoreTensor(_cd_forward(H, Vbar, p, cfg, keep_cache=False)[0], "CD")


def scn_combine(S_ci: ScoreTensor, S_cd: ScoreTensor, p: Params, cfg: ModelConfig) -> np.ndarray:
    """Per-frame output posteriors (T x C for the PSE head) from the two score tensors"""
    if S_ci.data.shape != S_cd.data.shape or S_ci.data.shape[0] != cfg.n_slots:
        raise ShapeError(f"score tensors must both be {cfg.n_slots} x T", S_ci.data.shape, S_cd.data.shape)
    z0 = np.concatenate([S_ci.data.T, S_cd.data.T], axis=1)
    logits, _ = _scn_forward(z0, p, cfg)
    return _output_activation(logits, cfg)


def forward_pass(X: np.ndarray, V: ProfileSet, p: Params, cfg: ModelConfig, keep_cache: bool = True) -> ForwardResult:
    if V.n_slots != cfg.n_slots:
        raise ShapeError(f"expected {cfg.n_slots} profile slots", V.vectors.shape)
    H, speech_cache = _speech_forward(X, p, cfg)
    Vbar, speaker_cache = _speaker_forward(V.vectors, p, cfg)
    T, N = H.shape[0], cfg.n_slots

    if cfg.use_ci:
        ci, ci_cache = _ci_forward(H, Vbar, V.valid_mask)
    else:
        ci, ci_cache = np.zeros((N, T)), None
    if cfg.use_cd:
        cd, cd_caches = _cd_forward(H, Vbar, p, cfg, keep_cache)
    else:
        cd, cd_caches = np.zeros((N, T)), None

    z0 = np.concatenate([ci.T, cd.T], axis=1)
    logits, scn_cache = _scn_forward(z0, p, cfg)
    check_finite(logits, "output logits")
    cache = {}
    if keep_cache:
        cache = {"speech": speech_cache, "speaker": speaker_cache, "ci": ci_cache,
                 "cd": cd_caches, "scn": scn_cache}
    return ForwardResult(
        logits=logits,
        posteriors=_output_activation(logits, cfg),
        ci=ScoreTensor(ci, "CI"),
        cd=ScoreTensor(cd, "CD"),
        H=H,
        Vbar=Vbar,
        mask=V.valid_mask.copy(),
        cache=cache,
    )


def forward(X: np.ndarray, V: ProfileSet, p: Params, cfg: ModelConfig) -> np.ndarray:
    """Posteriors per frame: T x C class probabilities (T x N for the multilabel head)"""
    return forward_pass(X, V, p, cfg, keep_cache=False).posteriors


def backward_pass(result: ForwardResult, dlogits: np.ndarray, p: Params, cfg: ModelConfig,
                  dVbar_extra: Optional[np.ndarray] = None, freeze_speech: bool = False) -> Params:
    """
    Gradients of a scalar loss for every tensor in p, given its gradient
    w.r.t. the output logits and (optionally) w.r.t. the projected profiles.
    Frozen speech-encoder tensors receive exact zeros.
    """
    if not result.cache:
        raise ValueError("forward pass was run without keep_cache")
    cache = result.cache
    grads: Grads = {}
    N = cfg.n_slots
    dz0 = _scn_backward(dlogits, cache["scn"], p, cfg, grads)
    dH = np.zeros_like(result.H)
    dVbar = np.zeros_like(result.Vbar) if dVbar_extra is None else np.array(dVbar_extra, dtype=np.float64)
    if cfg.use_ci:
        dh, dv = _ci_backward(dz0[:, :N].T, cache["ci"])
        dH += dh
        dVbar += dv
    if cfg.use_cd:
        dh, dv = _cd_backward(dz0[:, N:].T, cache["cd"], p, cfg, grads)
        dH += dh
        dVbar += dv
    _speaker_backward(dVbar, cache["speaker"], p, cfg, grads)
    if not freeze_speech:
        _speech_backward(dH, cache["speech"], p, cfg, grads)

    out = p.zeros_like()
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise NumericError(f"non-finite gradient for {name}")
        out[name] = g
    if freeze_speech:
        for name in p.group(SPEECH_PREFIX):
            out[name] = np.zeros_like(p[name])
    return out
