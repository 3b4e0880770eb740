"""
Training corpus simulation.

For each sample: draw the conversation's speakers from a shared bank,
simulate their activity, fill it with Gaussian frames, then build the
profile set from the speakers' means (plus a little noise), augmented with
distractor speakers who never talk, and scatter everything over random
slots of the N available.
"""

import logging
import os
from typing import List, Optional

import numpy as np

from encoding.pse_codec import encode_sequence
from models.activity import ActivityMatrix
from models.profiles import ProfileSet
from models.sim_sample import SimSample
from models.timeline import activity_to_timeline
from parsers.formats import write_features, write_labels, write_profiles
from parsers.manifest import ManifestEntry, write_manifest
from parsers.rttm import write_rttm
from simulation.config import SimConfig
from simulation.features import SpeakerModel, make_speaker_bank, synth_features
from simulation.labels import simulate_labels

logger = logging.getLogger(__name__)


class ConversationSimulator:
    """Seeded generator of SimSamples sharing one speaker bank"""

    def __init__(self, cfg: SimConfig):
        self.cfg = cfg
        bank_seed = np.random.SeedSequence(cfg.seed, spawn_key=(0,))
        self.bank: List[SpeakerModel] = make_speaker_bank(
            cfg.speaker_bank, cfg.feat_dim, cfg.feature_sigma, cfg.min_separation,
            cfg.mean_scale, np.random.default_rng(bank_seed))
        self.stats = {
            'samples': 0,
            'speech_frames': 0,
            'overlap_frames': 0,
        }

    def sample(self, index: int, finetune: bool = False) -> SimSample:
        """Sample `index` of the stream; the same index always yields the same sample"""
        cfg = self.cfg
        rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(1, int(finetune), index)))
        n_talk = cfg.speakers_per_sample
        chosen = rng.choice(cfg.speaker_bank, size=n_talk + cfg.distractors, replace=False)
        talkers = [self.bank[i] for i in chosen[:n_talk]]

        acts = simulate_labels(cfg.turn_stats(finetune), n_talk, cfg.duration_s, cfg.max_overlap,
                               rng, cfg.frame_rate, cfg.max_resample)
        if n_talk:
            features = synth_features(acts, talkers, rng, cfg.noise_floor)
        else:
            features = cfg.noise_floor * rng.standard_normal((acts.T, cfg.feat_dim))

        slots = rng.permutation(cfg.n_slots) if cfg.shuffle_slots else np.arange(cfg.n_slots)
        labels = np.zeros((acts.T, cfg.n_slots), dtype=np.uint8)
        vectors = np.zeros((cfg.n_slots, cfg.feat_dim))
        mask = np.zeros(cfg.n_slots, dtype=bool)
        speaker_ids: List[Optional[int]] = [None] * cfg.n_slots
        for j, bank_id in enumerate(chosen):
            slot = int(slots[j])
            if j < n_talk:
                labels[:, slot] = acts.data[:, j]
            vectors[slot] = self.bank[bank_id].mean + cfg.profile_noise * rng.standard_normal(cfg.feat_dim)
            mask[slot] = True
            speaker_ids[slot] = int(bank_id)

        sample = SimSample(
            features=features,
            labels=ActivityMatrix(labels),
            profiles=ProfileSet(vectors, mask),
            speaker_ids=speaker_ids,
            sample_id=f"{'ft' if finetune else 'sim'}{index:06d}",
        )
        counts = sample.labels.popcounts
        self.stats['samples'] += 1
        self.stats['speech_frames'] += int((counts >= 1).sum())
        self.stats['overlap_frames'] += int((counts >= 2).sum())
        return sample

    def overlap_ratio(self) -> float:
        """Overlapped over speech frames, pooled across all samples drawn so far"""
        if self.stats['speech_frames'] == 0:
            return 0.0
        return self.stats['overlap_frames'] / self.stats['speech_frames']

    def get_statistics(self):
        return dict(self.stats, overlap_ratio=self.overlap_ratio())


def simulate_dataset(count: int, cfg: SimConfig, finetune: bool = False, start: int = 0) -> List[SimSample]:
    """count samples; finetune switches to the second turn-taking distribution"""
    simulator = ConversationSimulator(cfg)
    samples = [simulator.sample(start + i, finetune) for i in range(count)]
    logger.info("Simulated %d samples: %s", count, simulator.get_statistics())
    return samples


def write_corpus(samples: List[SimSample], out_dir: str, cfg: SimConfig, binary_features: bool = False) -> str:
    """Write features, labels, profiles and reference RTTM per sample; returns the manifest path"""
    for sub in ("feats", "labels", "profiles", "rttm"):
        os.makedirs(os.path.join(out_dir, sub), exist_ok=True)
    entries = []
    pse = cfg.pse
    frame_s = 1.0 / cfg.frame_rate
    for sample in samples:
        sid = sample.sample_id
        entry = ManifestEntry(
            sid,
            os.path.join(out_dir, "feats", f"{sid}.feat"),
            os.path.join(out_dir, "labels", f"{sid}.pse"),
            os.path.join(out_dir, "profiles", f"{sid}.prof"),
            os.path.join(out_dir, "rttm", f"{sid}.rttm"),
        )
        write_features(entry.feat_path, sample.features, binary=binary_features)
        write_labels(entry.label_path, encode_sequence(sample.labels, pse), pse)
        write_profiles(entry.profile_path, sample.profiles)
        names = [f"spk{i}" if i is not None else f"slot{n}" for n, i in enumerate(sample.speaker_ids)]
        write_rttm(entry.rttm_path, activity_to_timeline(sample.labels.data, frame_s, names), sid)
        entries.append(entry)
    manifest = os.path.join(out_dir, "manifest.txt")
    write_manifest(manifest, entries)
    logger.info("Wrote %d samples to %s", len(samples), out_dir)
    return manifest
