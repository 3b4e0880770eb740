import time

import numpy as np
import pytest

from encoding.pse_codec import encode_sequence
from models.activity import ActivityMatrix
from simulation import (ConversationSimulator, SimConfig, SpeakerModel, TurnStats, limit_speakers,
                        make_speaker_bank, simulate_dataset, simulate_labels, simulate_recording, speaker_track,
                        synth_features)
from utils.errors import ConfigError, SimulationError


def _small_cfg(**overrides):
    base = dict(feat_dim=8, speaker_bank=12, mean_scale=3.0, min_separation=2.0)
    base.update(overrides)
    return SimConfig(**base)


def test_config_validation():
    with pytest.raises(ConfigError):
        SimConfig(n_slots=4, max_overlap=2, speakers_per_sample=4, distractors=1)
    with pytest.raises(ConfigError):
        SimConfig(speaker_bank=5)
    with pytest.raises(ConfigError):
        TurnStats(talk_median_s=0.0)
    assert SimConfig().T == 1600
    assert SimConfig().turn_stats(finetune=True).talk_median_s == pytest.approx(1.2)


def test_samples_are_deterministic_per_index():
    cfg = _small_cfg()
    first = ConversationSimulator(cfg).sample(3)
    second = ConversationSimulator(cfg).sample(3)
    np.testing.assert_array_equal(first.features, second.features)
    assert first.labels == second.labels
    assert first.speaker_ids == second.speaker_ids
    other = ConversationSimulator(cfg).sample(4)
    assert not np.array_equal(first.features, other.features)
    assert first.sample_id == "sim000003"
    assert ConversationSimulator(cfg).sample(3, finetune=True).sample_id == "ft000003"


def test_single_speaker_samples_never_overlap():
    cfg = _small_cfg(speakers_per_sample=1)
    for sample in simulate_dataset(5, cfg):
        assert sample.labels.popcounts.max() <= 1


def test_slots_profiles_and_labels_agree():
    cfg = _small_cfg()
    for sample in simulate_dataset(10, cfg):
        mask = sample.profiles.valid_mask
        assert mask.sum() == cfg.speakers_per_sample + cfg.distractors
        assert not sample.labels.data[:, ~mask].any()
        np.testing.assert_array_equal(sample.profiles.vectors[~mask], 0.0)
        assert len(sample.active_slots) <= cfg.speakers_per_sample
        assert sample.labels.popcounts.max() <= cfg.max_overlap
        assert sample.labels.T == cfg.T
        assert sample.features.shape == (cfg.T, cfg.feat_dim)
        encode_sequence(sample.labels, cfg.pse)
        assert [i is None for i in sample.speaker_ids] == list(~mask)


def test_pooled_overlap_ratio_near_target():
    simulator = ConversationSimulator(_small_cfg())
    for index in range(100):
        simulator.sample(index)
    ratio = simulator.overlap_ratio()
    assert 0.32 <= ratio <= 0.52
    assert simulator.get_statistics()["samples"] == 100


def test_speaker_track_talk_share(rng):
    stats = TurnStats()
    tracks = [speaker_track(stats, 1600, rng) for _ in range(200)]
    share = float(np.mean(tracks))
    assert 0.22 <= share <= 0.34
    assert set(np.unique(tracks)) <= {0, 1}


def test_limit_speakers(rng):
    acts = np.ones((50, 6), dtype=np.uint8)
    limited = limit_speakers(acts, 4, rng)
    assert limited.sum(axis=1).max() <= 4
    assert np.all(limited <= acts)
    with pytest.raises(SimulationError):
        limit_speakers(acts, 4, rng, max_resample=1)


def test_simulate_labels_shape(rng):
    acts = simulate_labels(TurnStats(), 3, duration_s=2.0, K=2, rng=rng)
    assert isinstance(acts, ActivityMatrix)
    assert acts.data.shape == (200, 3)
    assert acts.popcounts.max() <= 2


def test_speaker_bank_separation(rng):
    bank = make_speaker_bank(10, 8, sigma=1.0, min_separation=2.0, mean_scale=3.0, rng=rng)
    means = np.array([s.mean for s in bank])
    dists = np.linalg.norm(means[:, None] - means[None, :], axis=-1)
    assert dists[~np.eye(10, dtype=bool)].min() >= 2.0
    with pytest.raises(SimulationError):
        make_speaker_bank(10, 1, min_separation=10.0, mean_scale=0.1, rng=rng, max_tries=20)


def test_feature_statistics(rng):
    mean = np.array([2.0, -1.0, 0.5])
    labels = ActivityMatrix(np.concatenate([np.ones((4000, 1)), np.zeros((4000, 1))]).astype(np.uint8))
    X = synth_features(labels, [SpeakerModel(mean, 1.0)], rng, noise_floor=0.3)
    np.testing.assert_allclose(X[:4000].mean(axis=0), mean, atol=0.08)
    np.testing.assert_allclose(X[:4000].std(axis=0), 1.0, atol=0.08)
    np.testing.assert_allclose(X[4000:].mean(axis=0), 0.0, atol=0.03)
    np.testing.assert_allclose(X[4000:].std(axis=0), 0.3, atol=0.03)


def test_overlapped_frames_sum_speakers(rng):
    a, b = np.array([5.0, 0.0]), np.array([0.0, 5.0])
    labels = ActivityMatrix(np.ones((3000, 2), dtype=np.uint8))
    X = synth_features(labels, [SpeakerModel(a, 0.5), SpeakerModel(b, 0.5)], rng)
    np.testing.assert_allclose(X.mean(axis=0), a + b, atol=0.05)


def test_recording_reference_and_vad():
    cfg = _small_cfg()
    rec = simulate_recording(cfg, duration_s=30.0, n_speakers=3, index=1)
    assert rec.features.shape == (3000, cfg.feat_dim)
    assert len(rec.speaker_ids) == 3
    assert set(rec.reference.speakers) <= {f"spk{i}" for i in rec.speaker_ids}
    for start, end in rec.vad:
        assert end > start
    voiced = sum(end - start for start, end in rec.vad)
    speech_frames = int((rec.activity.popcounts > 0).sum())
    assert voiced == pytest.approx(speech_frames * 0.01)


@pytest.mark.slow
def test_dataset_of_450_samples_builds_within_a_minute():
    started = time.perf_counter()
    samples = simulate_dataset(450, SimConfig(seed=3))
    elapsed = time.perf_counter() - started
    assert len(samples) == 450
    assert elapsed < 60.0
