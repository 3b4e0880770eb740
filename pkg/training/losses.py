"""
Training objective: cross entropy over power-set classes plus a hinge
penalty on the cosine similarity between projected speaker profiles.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from encoding.pse_codec import encode_sequence
from models.activity import ActivityMatrix, PSELabelSeq
from numerics.kernels import cosine_matrix, cosine_matrix_backward
from utils.errors import OutOfRangeError, ShapeError

PROB_FLOOR = 1e-12


@dataclass
class LossBreakdown:
    ce: float
    sim: float
    total: float
    lam: float

    @classmethod
    def combine(cls, ce: float, sim: float, lam: float) -> "LossBreakdown":
        return cls(ce=float(ce), sim=float(sim), total=float(ce + lam * sim), lam=float(lam))

    def as_row(self, step: int, lr: float) -> str:
        return f"{step}\t{self.ce:.6f}\t{self.sim:.6f}\t{self.total:.6f}\t{lr:.3g}"


def _labels_array(labels, C: int) -> np.ndarray:
    raw = np.asarray(labels.labels if isinstance(labels, PSELabelSeq) else labels, dtype=np.int64)
    bad = np.flatnonzero((raw < 0) | (raw >= C))
    if bad.size:
        frame = int(bad[0])
        raise OutOfRangeError(f"label {int(raw[frame])} at frame {frame} outside [0, {C})")
    return raw


def ce_loss(posteriors: np.ndarray, labels) -> float:
    """Mean over frames of -log p_t[label_t], probabilities floored at 1e-12"""
    T, C = posteriors.shape
    raw = _labels_array(labels, C)
    if raw.shape[0] != T:
        raise ShapeError("posteriors and labels differ in length", posteriors.shape, raw.shape)
    picked = np.maximum(posteriors[np.arange(T), raw], PROB_FLOOR)
    return float(-np.log(picked).mean())


def ce_grad_logits(posteriors: np.ndarray, labels) -> np.ndarray:
    """d ce_loss / d logits for softmax outputs: (p - onehot) / T"""
    T, C = posteriors.shape
    raw = _labels_array(labels, C)
    grad = posteriors.copy()
    grad[np.arange(T), raw] -= 1.0
    return grad / T


def bce_loss(probs: np.ndarray, targets: np.ndarray) -> float:
    """Mean binary cross entropy of per-speaker sigmoid outputs"""
    p = np.clip(probs, PROB_FLOOR, 1.0 - PROB_FLOOR)
    y = np.asarray(targets, dtype=np.float64)
    return float(-(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)).mean())


def bce_grad_logits(probs: np.ndarray, targets: np.ndarray) -> np.ndarray:
    return (probs - np.asarray(targets, dtype=np.float64)) / probs.size


def _pair_weights(mask: np.ndarray, pair_mode: str) -> np.ndarray:
    mask = np.asarray(mask, dtype=bool)
    weights = (mask[:, None] & mask[None, :]).astype(np.float64)
    if pair_mode == "ordered":
        np.fill_diagonal(weights, 0.0)
    elif pair_mode == "unordered":
        weights = np.triu(weights, k=1)
    return weights


def similarity_loss_and_grad(Vbar: np.ndarray, mask: np.ndarray, delta: float,
                             pair_mode: str = "ordered") -> Tuple[float, np.ndarray]:
    S, cache = cosine_matrix(Vbar, Vbar)
    weights = _pair_weights(mask, pair_mode)
    margin = S + delta - 1.0
    active = (margin > 0) & (weights > 0)
    loss = float((np.maximum(margin, 0.0) * weights).sum())
    dA, dB = cosine_matrix_backward(active * weights, cache)
    return loss, dA + dB


def similarity_loss(Vbar: np.ndarray, mask: np.ndarray, delta: float, pair_mode: str = "ordered") -> float:
    """
    Sum over valid speaker pairs of max(0, cos(v_i, v_j) + delta - 1).

    pair_mode: "ordered" counts (i, j) and (j, i) for i != j, "unordered"
    counts each distinct pair once, "literal" also includes i == j.
    """
    return similarity_loss_and_grad(Vbar, mask, delta, pair_mode)[0]


def objective(result, targets, model_cfg, train_cfg) -> Tuple[LossBreakdown, np.ndarray, np.ndarray]:
    """
    Loss of one forward result plus its gradients w.r.t. the logits and the
    projected profiles. targets is an ActivityMatrix (or PSELabelSeq for the
    PSE head).
    """
    if model_cfg.output_head == "pse":
        labels = targets if isinstance(targets, PSELabelSeq) else encode_sequence(targets, model_cfg.pse)
        ce = ce_loss(result.posteriors, labels)
        dlogits = ce_grad_logits(result.posteriors, labels)
    else:
        acts = targets.data if isinstance(targets, ActivityMatrix) else np.asarray(targets)
        ce = bce_loss(result.posteriors, acts)
        dlogits = bce_grad_logits(result.posteriors, acts)
    sim, dVbar = similarity_loss_and_grad(result.Vbar, result.mask, train_cfg.delta, train_cfg.pair_mode)
    return LossBreakdown.combine(ce, sim, train_cfg.lambda_sim), dlogits, train_cfg.lambda_sim * dVbar


def total_loss(result, targets, model_cfg, train_cfg) -> LossBreakdown:
    """ce + lambda * sim for one forward result"""
    return objective(result, targets, model_cfg, train_cfg)[0]
