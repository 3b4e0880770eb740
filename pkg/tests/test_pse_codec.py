from itertools import product

import numpy as np
import pytest

from encoding.pse_codec import (PseConfig, activity_table, class_to_pse, decode_pse, decode_sequence,
                                encode_pse, encode_sequence, num_classes, pse_to_class)
from models.activity import ActivityMatrix, PSELabelSeq
from utils.errors import ConfigError, OutOfRangeError, OverlapExceededError


@pytest.mark.parametrize("K,expected", [(1, 17), (2, 137), (3, 697), (4, 2517)])
def test_class_counts_for_sixteen_slots(K, expected):
    assert num_classes(16, K) == expected
    assert PseConfig(16, K).C == expected


def test_invalid_config():
    with pytest.raises(ConfigError):
        PseConfig(4, 0)
    with pytest.raises(ConfigError):
        PseConfig(4, 5)


def test_silence_and_solo_speakers_come_first():
    cfg = PseConfig(16, 4)
    assert pse_to_class(0, cfg) == 0
    for n in range(16):
        assert pse_to_class(1 << n, cfg) == n + 1
        assert class_to_pse(n + 1, cfg) == 1 << n


def test_encode_pse_slot_weights():
    assert encode_pse([0, 1, 0, 1]) == 10
    assert encode_pse([0, 0, 0]) == 0
    np.testing.assert_array_equal(decode_pse(10, 4), [0, 1, 0, 1])


def test_exhaustive_round_trip_small():
    for N, K in [(3, 1), (3, 2), (3, 3), (5, 2), (6, 3)]:
        cfg = PseConfig(N, K)
        seen = set()
        for row in product((0, 1), repeat=N):
            if sum(row) > K:
                with pytest.raises(OverlapExceededError):
                    pse_to_class(encode_pse(row), cfg)
                continue
            label = pse_to_class(encode_pse(row), cfg)
            assert 0 <= label < cfg.C
            seen.add(label)
            np.testing.assert_array_equal(decode_pse(class_to_pse(label, cfg), N), row)
        assert seen == set(range(cfg.C))


def test_classes_ordered_by_popcount_then_code():
    cfg = PseConfig(5, 3)
    codes = [class_to_pse(c, cfg) for c in range(cfg.C)]
    keys = [(bin(code).count("1"), code) for code in codes]
    assert keys == sorted(keys)


def test_activity_table_rows_match_classes():
    cfg = PseConfig(4, 2)
    table = activity_table(cfg)
    assert table.shape == (cfg.C, 4)
    for c in range(cfg.C):
        assert encode_pse(table[c]) == class_to_pse(c, cfg)


def test_sequence_round_trip(rng):
    cfg = PseConfig(6, 2)
    data = np.zeros((50, 6), dtype=np.uint8)
    for t in range(50):
        k = rng.integers(0, 3)
        data[t, rng.choice(6, size=k, replace=False)] = 1
    acts = ActivityMatrix(data)
    labels = encode_sequence(acts, cfg)
    assert len(labels) == 50
    assert decode_sequence(labels, cfg) == acts


def test_overlap_exceeded_reports_frame():
    cfg = PseConfig(4, 2)
    data = np.zeros((6, 4), dtype=np.uint8)
    data[4, :3] = 1
    with pytest.raises(OverlapExceededError) as info:
        encode_sequence(ActivityMatrix(data), cfg)
    assert info.value.frame == 4
    assert info.value.active == 3


def test_out_of_range_codes_and_classes():
    cfg = PseConfig(3, 2)
    with pytest.raises(OutOfRangeError):
        decode_pse(8, 3)
    with pytest.raises(OutOfRangeError):
        class_to_pse(cfg.C, cfg)
    with pytest.raises(OutOfRangeError):
        PSELabelSeq(np.array([0, cfg.C]), cfg.C)


def test_empty_sequence():
    cfg = PseConfig(3, 2)
    acts = decode_sequence(PSELabelSeq(np.zeros(0, dtype=np.int64), cfg.C), cfg)
    assert acts.data.shape == (0, 3)


@pytest.mark.parametrize("N", range(1, 11))
def test_full_power_set_bijection(N):
    cfg = PseConfig(N, N)
    codes = np.arange(1 << N)
    acts = ActivityMatrix(((codes[:, None] >> np.arange(N)[None, :]) & 1).astype(np.uint8))
    labels = encode_sequence(acts, cfg)
    assert sorted(labels.labels.tolist()) == list(range(cfg.C))
    assert cfg.C == 1 << N
    assert decode_sequence(labels, cfg) == acts


@pytest.mark.parametrize("K", [1, 2, 3, 4])
def test_all_classes_of_sixteen_slots(K):
    cfg = PseConfig(16, K)
    table = activity_table(cfg)
    labels = encode_sequence(ActivityMatrix(table), cfg)
    np.testing.assert_array_equal(labels.labels, np.arange(cfg.C))
    assert table.sum(axis=1).max() == K


def test_slot_permutation_commutes_with_the_codec(rng):
    cfg = PseConfig(5, 3)
    data = np.zeros((40, 5), dtype=np.uint8)
    for t in range(40):
        k = int(rng.integers(0, 4))
        if k:
            data[t, rng.choice(5, size=k, replace=False)] = 1
    acts = ActivityMatrix(data)
    order = [3, 0, 4, 1, 2]
    direct = decode_sequence(encode_sequence(acts.permute_slots(order), cfg), cfg)
    assert direct == decode_sequence(encode_sequence(acts, cfg), cfg).permute_slots(order)
    assert direct == acts.permute_slots(order)
