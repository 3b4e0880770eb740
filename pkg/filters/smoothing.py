import logging
from typing import Optional

import numpy as np

from encoding.pse_codec import PseConfig, decode_sequence, encode_sequence
from models.activity import ActivityMatrix, PSELabelSeq
from numerics.kernels import median_filter
from sond.model import limit_overlap
from utils.errors import ConfigError

logger = logging.getLogger(__name__)


def odd_window(window_s: float, frame_rate: int = 100) -> int:
    """Window length in frames, rounded up to the next odd count (1.28 s -> 129)"""
    if window_s <= 0:
        raise ConfigError(f"smoothing window must be positive, got {window_s}")
    frames = max(1, int(round(window_s * frame_rate)))
    return frames if frames % 2 else frames + 1


def smooth_activity(acts: np.ndarray, window: int) -> np.ndarray:
    """Median filter each speaker column of a binary T x N matrix"""
    acts = np.asarray(acts)
    out = np.zeros(acts.shape, dtype=np.uint8)
    for n in range(acts.shape[1]):
        out[:, n] = median_filter(acts[:, n], window) > 0.5
    return out


def smooth(labels: PSELabelSeq, cfg: PseConfig, window_s: float = 1.28, frame_rate: int = 100,
           scores: Optional[np.ndarray] = None) -> PSELabelSeq:
    """
    Median-smooth the decoded per-speaker streams and re-encode. Frames left
    with more than K speakers keep the K with the highest scores (T x N,
    e.g. speaker marginals); without scores lower slots win.
    """
    window = odd_window(window_s, frame_rate)
    acts = smooth_activity(decode_sequence(labels, cfg).data, window)
    if scores is None:
        scores = np.zeros(acts.shape)
    over = int((acts.sum(axis=1) > cfg.K).sum())
    if over:
        logger.debug("Smoothing produced %d frames above K=%d, trimming", over, cfg.K)
        acts = limit_overlap(acts, scores, cfg.K)
    return encode_sequence(ActivityMatrix(acts), cfg)
