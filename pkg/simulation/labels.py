"""
Speaker activity simulation. Every speaker alternates talk and silence
runs with log-normal lengths, independently of the others; superimposing
them yields natural overlap. Regions where more than K speakers talk are
repaired by silencing one randomly chosen speaker over the region.
"""

import logging

import numpy as np

from models.activity import ActivityMatrix
from simulation.config import TurnStats
from utils.errors import ConfigError, SimulationError

logger = logging.getLogger(__name__)


def _run_frames(rng: np.random.Generator, median_s: float, sigma: float, frame_rate: int) -> int:
    seconds = rng.lognormal(mean=np.log(median_s), sigma=sigma)
    return max(1, int(round(seconds * frame_rate)))


def speaker_track(stats: TurnStats, T: int, rng: np.random.Generator, frame_rate: int = 100) -> np.ndarray:
    """Binary talk/silence track of length T for one speaker, started mid-run"""
    talk_mean = stats.talk_median_s * np.exp(stats.talk_sigma ** 2 / 2)
    silence_mean = stats.silence_median_s * np.exp(stats.silence_sigma ** 2 / 2)
    talking = rng.random() < talk_mean / (talk_mean + silence_mean)
    track = np.zeros(T, dtype=np.uint8)
    t = 0
    first = True
    while t < T:
        if talking:
            length = _run_frames(rng, stats.talk_median_s, stats.talk_sigma, frame_rate)
        else:
            length = _run_frames(rng, stats.silence_median_s, stats.silence_sigma, frame_rate)
        if first:
            # residual of a run already in progress at t = 0
            length = max(1, int(rng.integers(1, length + 1)))
            first = False
        if talking:
            track[t:t + length] = 1
        t += length
        talking = not talking
    return track


def _regions(mask: np.ndarray):
    edges = np.diff(np.concatenate(([0], mask.astype(np.int8), [0])))
    return zip(np.flatnonzero(edges == 1), np.flatnonzero(edges == -1))


def limit_speakers(acts: np.ndarray, K: int, rng: np.random.Generator, max_resample: int = 100) -> np.ndarray:
    """Silence random speakers over regions exceeding K active until none remain"""
    acts = acts.copy()
    for _ in range(max_resample):
        over = acts.sum(axis=1) > K
        if not over.any():
            return acts
        for start, end in _regions(over):
            candidates = np.flatnonzero(acts[start:end].any(axis=0))
            acts[start:end, rng.choice(candidates)] = 0
    if (acts.sum(axis=1) > K).any():
        raise SimulationError(f"could not bring overlap down to K={K} within {max_resample} resamples")
    return acts


def simulate_labels(turn_stats: TurnStats, n_speakers: int, duration_s: float = 16.0, K: int = 4,
                    rng: np.random.Generator = None, frame_rate: int = 100,
                    max_resample: int = 100) -> ActivityMatrix:
    """T x n_speakers activity with at most K simultaneous speakers"""
    if n_speakers < 0 or K < 1:
        raise ConfigError(f"need n_speakers >= 0 and K >= 1, got {n_speakers}, {K}")
    rng = rng if rng is not None else np.random.default_rng()
    T = int(round(duration_s * frame_rate))
    acts = np.zeros((T, n_speakers), dtype=np.uint8)
    for s in range(n_speakers):
        acts[:, s] = speaker_track(turn_stats, T, rng, frame_rate)
    acts = limit_speakers(acts, K, rng, max_resample)
    matrix = ActivityMatrix(acts)
    logger.debug("Simulated %d speakers over %d frames, overlap ratio %.3f", n_speakers, T, matrix.overlap_ratio())
    return matrix
