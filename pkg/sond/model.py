import logging
from typing import Optional, Tuple

import numpy as np

from encoding.pse_codec import activity_table, encode_sequence
from models.activity import ActivityMatrix, PSELabelSeq
from models.profiles import ProfileSet
from sond.checkpoint import load_checkpoint, save_checkpoint
from sond.config import ModelConfig
from sond.network import forward
from sond.params import Params, init_params

logger = logging.getLogger(__name__)


class SondModel:
    """A configured SOND network with its parameters"""

    def __init__(self, cfg: ModelConfig, params: Optional[Params] = None, seed: int = 0):
        self.cfg = cfg
        self.params = params if params is not None else init_params(cfg, seed)

    @classmethod
    def load(cls, path: str) -> "SondModel":
        cfg, params = load_checkpoint(path)
        logger.info("Loaded SOND checkpoint %s (%d values)", path, params.num_parameters())
        return cls(cfg, params)

    def save(self, path: str) -> None:
        save_checkpoint(path, self.params, self.cfg)

    def posteriors(self, X: np.ndarray, profiles: ProfileSet) -> np.ndarray:
        return forward(X, profiles, self.params, self.cfg)

    def speaker_marginals(self, posteriors: np.ndarray) -> np.ndarray:
        return speaker_marginals(posteriors, self.cfg)

    def predict(self, X: np.ndarray, profiles: ProfileSet) -> Tuple[PSELabelSeq, np.ndarray]:
        post = self.posteriors(X, profiles)
        return decode_posteriors(post, self.cfg), post


def speaker_marginals(posteriors: np.ndarray, cfg: ModelConfig) -> np.ndarray:
    """T x N probability that each slot is active"""
    if cfg.output_head == "multilabel":
        return posteriors
    return posteriors @ activity_table(cfg.pse).astype(np.float64)


def decode_posteriors(posteriors: np.ndarray, cfg: ModelConfig) -> PSELabelSeq:
    """Class decision per frame; the multilabel head keeps at most K speakers above 0.5"""
    pse = cfg.pse
    if cfg.output_head == "pse":
        return PSELabelSeq(np.argmax(posteriors, axis=1), pse.C)
    active = posteriors > 0.5
    acts = limit_overlap(active.astype(np.uint8), posteriors, cfg.max_overlap)
    return encode_sequence(ActivityMatrix(acts), pse)


def limit_overlap(acts: np.ndarray, scores: np.ndarray, max_overlap: int) -> np.ndarray:
    """Keep the max_overlap highest-scoring active speakers on frames with too many"""
    acts = np.array(acts, dtype=np.uint8)
    over = np.flatnonzero(acts.sum(axis=1) > max_overlap)
    for t in over:
        ranked = np.argsort(-np.where(acts[t] > 0, scores[t], -np.inf), kind="stable")
        acts[t] = 0
        acts[t, ranked[:max_overlap]] = 1
    return acts
