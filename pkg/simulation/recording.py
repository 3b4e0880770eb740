import logging
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from models.activity import ActivityMatrix
from models.timeline import Timeline, activity_to_timeline
from simulation.config import SimConfig
from simulation.dataset import ConversationSimulator
from simulation.features import synth_features
from simulation.labels import simulate_labels

logger = logging.getLogger(__name__)


@dataclass
class SimRecording:
    """A long simulated conversation with oracle VAD and reference turns"""
    features: np.ndarray
    activity: ActivityMatrix
    vad: List[Tuple[float, float]]
    reference: Timeline
    speaker_ids: List[int]


def oracle_vad(activity: ActivityMatrix, frame_s: float = 0.01) -> List[Tuple[float, float]]:
    """Voiced intervals where at least one speaker talks"""
    speech = activity.popcounts > 0
    edges = np.diff(np.concatenate(([0], speech.astype(np.int8), [0])))
    return [(s * frame_s, e * frame_s) for s, e in zip(np.flatnonzero(edges == 1), np.flatnonzero(edges == -1))]


def simulate_recording(cfg: SimConfig, duration_s: float, n_speakers: int, index: int = 0,
                       finetune: bool = False) -> SimRecording:
    """One recording drawn from the same speaker bank as the training samples"""
    simulator = ConversationSimulator(cfg)
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(2, int(finetune), index)))
    chosen = [int(i) for i in rng.choice(cfg.speaker_bank, size=n_speakers, replace=False)]
    acts = simulate_labels(cfg.turn_stats(finetune), n_speakers, duration_s, cfg.max_overlap,
                           rng, cfg.frame_rate, cfg.max_resample)
    features = synth_features(acts, [simulator.bank[i] for i in chosen], rng, cfg.noise_floor)
    frame_s = 1.0 / cfg.frame_rate
    reference = activity_to_timeline(acts.data, frame_s, [f"spk{i}" for i in chosen])
    logger.info("Simulated %.1f s recording with %d speakers, overlap ratio %.3f",
                duration_s, n_speakers, acts.overlap_ratio())
    return SimRecording(features, acts, oracle_vad(acts, frame_s), reference, chosen)
