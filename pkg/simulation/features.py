import logging
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from models.activity import ActivityMatrix
from utils.errors import ShapeError, SimulationError

logger = logging.getLogger(__name__)


@dataclass
class SpeakerModel:
    """Isotropic Gaussian voice: frames of this speaker are mean + sigma * noise"""
    mean: np.ndarray
    sigma: float = 1.0


def make_speaker_bank(n: int, dim: int, sigma: float = 1.0, min_separation: float = 4.0,
                      mean_scale: float = 1.0, rng: np.random.Generator = None,
                      max_tries: int = 1000) -> List[SpeakerModel]:
    """n speakers whose means are pairwise at least min_separation * sigma apart"""
    rng = rng if rng is not None else np.random.default_rng()
    means: List[np.ndarray] = []
    for _ in range(n):
        for _ in range(max_tries):
            candidate = rng.normal(0.0, mean_scale, size=dim)
            if all(np.linalg.norm(candidate - m) >= min_separation * sigma for m in means):
                means.append(candidate)
                break
        else:
            raise SimulationError(f"could not place {n} speaker means {min_separation} sigma apart in {dim} dims")
    return [SpeakerModel(mean, sigma) for mean in means]


def synth_features(labels: ActivityMatrix, speakers: Sequence[SpeakerModel], rng: np.random.Generator,
                   noise_floor: float = 0.3) -> np.ndarray:
    """
    T x D frames: the sum of one draw per active speaker, or a noise-floor
    draw when nobody talks.
    """
    if len(speakers) != labels.N:
        raise ShapeError("one speaker model per activity column is required", (labels.N,), (len(speakers),))
    T = labels.T
    if not speakers:
        raise ShapeError("at least one speaker model is needed to know the feature size")
    D = speakers[0].mean.shape[0]
    X = np.zeros((T, D))
    acts = labels.data.astype(np.float64)
    for s, model in enumerate(speakers):
        X += acts[:, s:s + 1] * (model.mean[None, :] + model.sigma * rng.standard_normal((T, D)))
    silent = labels.popcounts == 0
    X[silent] = noise_floor * rng.standard_normal((int(silent.sum()), D))
    return X
