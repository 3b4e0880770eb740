"""
Power-set encoding (PSE) of per-frame speaker activity.

A frame's set of active speaker slots is first written as a raw integer
code (slot n contributes 2**n, slots counted from 0 in the order given by
the ProfileSet) and then mapped to a dense class index. Only subsets with
at most K members are representable. Dense classes are ordered by
(popcount, raw code): class 0 is silence and classes 1..N are the solo
speakers in slot order.
"""

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Sequence, Tuple

import numpy as np
import scipy.special

from models.activity import ActivityMatrix, PSELabelSeq
from utils.errors import ConfigError, OutOfRangeError, OverlapExceededError, ShapeError


@dataclass(frozen=True)
class PseConfig:
    N: int = 16
    K: int = 4

    def __post_init__(self):
        if not 1 <= self.K <= self.N:
            raise ConfigError(f"need 1 <= K <= N, got N={self.N} K={self.K}")
        if self.N > 62:
            raise ConfigError(f"at most 62 speaker slots are supported, got {self.N}")

    @property
    def C(self) -> int:
        return num_classes(self.N, self.K)


def num_classes(N: int, K: int) -> int:
    """Number of speaker subsets of size <= K, computed exactly"""
    if K < 1 or K > N:
        raise ConfigError(f"need 1 <= K <= N, got N={N} K={K}")
    return sum(int(scipy.special.comb(N, k, exact=True)) for k in range(K + 1))


def encode_pse(row: Sequence[int]) -> int:
    code = 0
    for n, y in enumerate(row):
        if y:
            code |= 1 << n
    return code


def decode_pse(code: int, N: int) -> np.ndarray:
    if code < 0 or code >= (1 << N):
        raise OutOfRangeError(f"code {code} outside [0, 2^{N})")
    return np.array([(code >> n) & 1 for n in range(N)], dtype=np.uint8)


@lru_cache(maxsize=32)
def _tables(N: int, K: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(class->code, codes sorted ascending, class of each sorted code)"""
    class_codes = []
    for k in range(K + 1):
        codes = sorted(sum(1 << n for n in subset) for subset in combinations(range(N), k))
        class_codes.extend(codes)
    class_to_code = np.array(class_codes, dtype=np.int64)
    order = np.argsort(class_to_code, kind="stable")
    return class_to_code, class_to_code[order], order.astype(np.int64)


def pse_to_class(code: int, cfg: PseConfig) -> int:
    if code < 0 or code >= (1 << cfg.N):
        raise OutOfRangeError(f"code {code} outside [0, 2^{cfg.N})")
    active = bin(int(code)).count("1")
    if active > cfg.K:
        raise OverlapExceededError(active, cfg.K)
    _, sorted_codes, sorted_classes = _tables(cfg.N, cfg.K)
    return int(sorted_classes[np.searchsorted(sorted_codes, code)])


def class_to_pse(label: int, cfg: PseConfig) -> int:
    class_to_code, _, _ = _tables(cfg.N, cfg.K)
    if label < 0 or label >= len(class_to_code):
        raise OutOfRangeError(f"class {label} outside [0, {len(class_to_code)})")
    return int(class_to_code[label])


@lru_cache(maxsize=32)
def _activity_table(N: int, K: int) -> np.ndarray:
    class_to_code, _, _ = _tables(N, K)
    bits = (class_to_code[:, None] >> np.arange(N)[None, :]) & 1
    table = bits.astype(np.uint8)
    table.setflags(write=False)
    return table


def activity_table(cfg: PseConfig) -> np.ndarray:
    """C x N binary matrix; row c is the speaker set of class c"""
    return _activity_table(cfg.N, cfg.K)


def encode_sequence(acts: ActivityMatrix, cfg: PseConfig) -> PSELabelSeq:
    if acts.N != cfg.N:
        raise ShapeError(f"activity has {acts.N} slots, config expects {cfg.N}", acts.data.shape)
    counts = acts.popcounts
    over = np.flatnonzero(counts > cfg.K)
    if over.size:
        frame = int(over[0])
        raise OverlapExceededError(int(counts[frame]), cfg.K, frame=frame)
    codes = acts.data.astype(np.int64) @ (np.int64(1) << np.arange(cfg.N, dtype=np.int64))
    _, sorted_codes, sorted_classes = _tables(cfg.N, cfg.K)
    return PSELabelSeq(sorted_classes[np.searchsorted(sorted_codes, codes)], cfg.C)


def decode_sequence(labels: PSELabelSeq, cfg: PseConfig) -> ActivityMatrix:
    table = activity_table(cfg)
    raw = np.asarray(labels.labels, dtype=np.int64)
    if raw.size and (raw.min() < 0 or raw.max() >= table.shape[0]):
        frame = int(np.flatnonzero((raw < 0) | (raw >= table.shape[0]))[0])
        raise OutOfRangeError(f"class {int(raw[frame])} at frame {frame} outside [0, {table.shape[0]})")
    return ActivityMatrix(table[raw] if raw.size else np.zeros((0, cfg.N), dtype=np.uint8))
