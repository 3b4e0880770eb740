import numpy as np
import pytest

from encoding.pse_codec import PseConfig, activity_table, encode_sequence
from filters import SegmentResult, average_posteriors, odd_window, smooth, smooth_activity, stitch
from models.activity import ActivityMatrix
from models.timeline import activity_to_timeline
from utils.errors import ConfigError, OutOfRangeError, ShapeError
from utils.segmentation import plan_segments, to_frames, windows


def test_segment_counts():
    assert plan_segments([(0.0, 16.0)]).segments == [(0.0, 16.0)]
    assert plan_segments([(0.0, 24.0)]).segments == [(0.0, 16.0), (4.0, 20.0), (8.0, 24.0)]
    assert plan_segments([(0.0, 1.28)]).chunks == [(0.0, 1.28)]


def test_windows_stay_inside_regions_and_cover_them():
    vad = [(0.5, 3.0), (5.0, 5.5)]
    wins = windows(vad, 1.28, 0.64)
    for start, end in wins:
        assert any(s <= start and end <= e + 1e-9 for s, e in vad)
    assert wins[-1] == (5.0, 5.5)
    assert max(end for start, end in wins if end <= 3.0) == pytest.approx(3.0)


def test_short_regions_and_bad_vad():
    assert plan_segments([(1.0, 1.004)]).segments == []
    assert plan_segments([]).segments == []
    with pytest.raises(OutOfRangeError):
        plan_segments([(2.0, 3.0), (1.0, 1.5)])
    with pytest.raises(ConfigError):
        windows([(0.0, 1.0)], 0.0, 1.0)
    assert to_frames((0.5, 1.25)) == (50, 125)
    assert to_frames((0.3, 0.7)) == (30, 70)
    assert to_frames((0.504, 2.496)) == (51, 249)
    assert to_frames((0.501, 0.509)) == (51, 51)


def test_odd_window():
    assert odd_window(1.28) == 129
    assert odd_window(0.05) == 5
    with pytest.raises(ConfigError):
        odd_window(0.0)


def test_smoothing_removes_blips_and_keeps_constant_streams():
    acts = np.zeros((40, 2), dtype=np.uint8)
    acts[10:30, 0] = 1
    acts[20, 0] = 0
    acts[5, 1] = 1
    smoothed = smooth_activity(acts, 5)
    np.testing.assert_array_equal(smoothed[10:30, 0], 1)
    assert smoothed[:, 1].sum() == 0
    const = np.ones((12, 3), dtype=np.uint8)
    np.testing.assert_array_equal(smooth_activity(const, 129), const)


def test_smooth_on_labels_respects_k():
    cfg = PseConfig(3, 2)
    acts = np.zeros((30, 3), dtype=np.uint8)
    acts[:, 0] = 1
    acts[:, 1] = 1
    acts[14, :] = [0, 0, 1]
    labels = encode_sequence(ActivityMatrix(acts), cfg)
    out = smooth(labels, cfg, window_s=0.05)
    expected = np.zeros_like(acts)
    expected[:, :2] = 1
    assert out == encode_sequence(ActivityMatrix(expected), cfg)


def _one_hot_posteriors(acts, cfg):
    labels = encode_sequence(ActivityMatrix(acts), cfg.pse).labels
    post = np.full((len(labels), cfg.num_classes), 0.01)
    post[np.arange(len(labels)), labels] = 1.0
    return post / post.sum(axis=1, keepdims=True)


def test_stitch_single_segment(tiny_cfg):
    acts = np.zeros((20, 3), dtype=np.uint8)
    acts[2:12, 0] = 1
    acts[8:18, 1] = 1
    res = stitch([SegmentResult(0, _one_hot_posteriors(acts, tiny_cfg))], 20, tiny_cfg,
                 smooth_window=1, min_turn_frames=1)
    np.testing.assert_array_equal(res.activity, acts)
    assert res.covered.all()
    expected = activity_to_timeline(acts, 0.01, ["spk0", "spk1", "spk2"])
    assert [(t.speaker, t.start, t.end) for t in res.timeline.turns] == \
        [(t.speaker, t.start, t.end) for t in expected.turns]


def test_stitch_agreeing_overlaps_match_single_pass(tiny_cfg):
    acts = np.zeros((30, 3), dtype=np.uint8)
    acts[3:20, 2] = 1
    acts[15:28, 0] = 1
    post = _one_hot_posteriors(acts, tiny_cfg)
    whole = stitch([SegmentResult(0, post)], 30, tiny_cfg, smooth_window=3)
    pieces = stitch([SegmentResult(0, post[:20]), SegmentResult(10, post[10:])], 30, tiny_cfg, smooth_window=3)
    np.testing.assert_array_equal(pieces.activity, whole.activity)
    np.testing.assert_allclose(pieces.posteriors, whole.posteriors)


def test_stitch_matches_brute_force_average(tiny_cfg, rng):
    T = 25
    spans = [(0, 12), (6, 20), (15, 25), (18, 23)]
    results = []
    for start, end in spans:
        raw = rng.random((end - start, tiny_cfg.num_classes))
        results.append(SegmentResult(start, raw / raw.sum(axis=1, keepdims=True)))
    table = activity_table(tiny_cfg.pse)
    expected = np.zeros((T, 3), dtype=np.uint8)
    for t in range(T):
        rows = [r.posteriors[t - r.start_frame] for r in results if r.start_frame <= t < r.end_frame]
        expected[t] = table[np.argmax(np.mean(rows, axis=0))]
    res = stitch(results, T, tiny_cfg, smooth_window=1, min_turn_frames=1)
    np.testing.assert_array_equal(res.activity, expected)


def test_uncovered_frames_and_invalid_slots_stay_silent(tiny_cfg):
    acts = np.ones((10, 3), dtype=np.uint8)
    acts[:, 2] = 0
    post = _one_hot_posteriors(acts, tiny_cfg)
    res = stitch([SegmentResult(5, post)], 20, tiny_cfg, valid_mask=np.array([True, False, True]),
                 smooth_window=1)
    assert not res.covered[:5].any() and res.covered[5:15].all()
    assert not res.activity[:5].any() and not res.activity[15:].any()
    assert not res.activity[:, 1].any()
    np.testing.assert_array_equal(res.activity[5:15, 0], 1)
    assert res.timeline.speakers == ["spk0"]


def test_average_posteriors_checks_bounds():
    with pytest.raises(ShapeError):
        average_posteriors([SegmentResult(8, np.ones((5, 2)))], 10)
    post, covered = average_posteriors([], 4)
    assert post.shape == (4, 0) and not covered.any()
