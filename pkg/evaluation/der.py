"""
Diarization error rate with a no-score collar around reference boundaries.

Time is cut at every turn and collar edge; each elementary interval is
scored as a whole, with the usual multi-speaker accounting:

    miss        = max(0, n_ref - n_hyp)
    false alarm = max(0, n_hyp - n_ref)
    confusion   = min(n_ref, n_hyp) - n_correct

where n_correct counts reference speakers whose mapped hypothesis speaker
is also active. The ref<->hyp mapping maximises total scored overlap.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from models.der_result import DerResult
from models.timeline import Timeline
from utils.config import dataclass_from_dict
from utils.errors import ConfigError, UndefinedDERError

logger = logging.getLogger(__name__)

DENOMINATORS = ("ref_speech", "scored_time")
OVERLAP_MODES = ("per_speaker", "exclude")


@dataclass(frozen=True)
class ScoreConfig:
    collar: float = 0.25
    denominator: str = "ref_speech"
    overlap: str = "per_speaker"

    def __post_init__(self):
        if self.collar < 0:
            raise ConfigError(f"collar must be >= 0, got {self.collar}")
        if self.denominator not in DENOMINATORS:
            raise ConfigError(f"denominator must be one of {DENOMINATORS}")
        if self.overlap not in OVERLAP_MODES:
            raise ConfigError(f"overlap must be one of {OVERLAP_MODES}")

    @classmethod
    def from_dict(cls, data) -> "ScoreConfig":
        return dataclass_from_dict(cls, data)


@dataclass
class ScoredGrid:
    """Elementary intervals with per-speaker activity"""
    durations: np.ndarray
    scored: np.ndarray
    ref_active: np.ndarray
    hyp_active: np.ndarray
    ref_speakers: List[str]
    hyp_speakers: List[str]


def _activity(timeline: Timeline, speakers: List[str], mids: np.ndarray) -> np.ndarray:
    active = np.zeros((mids.shape[0], len(speakers)), dtype=bool)
    for j, speaker in enumerate(speakers):
        for turn in timeline.by_speaker().get(speaker, []):
            active[:, j] |= (mids >= turn.start) & (mids < turn.end)
    return active


def build_grid(ref: Timeline, hyp: Timeline, collar: float, overlap: str = "per_speaker") -> ScoredGrid:
    ref = ref.merged()
    hyp = hyp.merged()
    ref_bounds = np.array([b for t in ref.turns for b in (t.start, t.end)], dtype=np.float64)
    points = [ref_bounds, np.array([b for t in hyp.turns for b in (t.start, t.end)], dtype=np.float64)]
    if collar > 0:
        points += [ref_bounds - collar, ref_bounds + collar]
    cuts = np.unique(np.concatenate(points)) if any(p.size for p in points) else np.zeros(0)
    if cuts.size < 2:
        empty = np.zeros((0,))
        return ScoredGrid(empty, empty.astype(bool), np.zeros((0, 0), bool), np.zeros((0, 0), bool),
                          ref.speakers, hyp.speakers)
    durations = np.diff(cuts)
    mids = (cuts[:-1] + cuts[1:]) / 2.0
    scored = np.ones(mids.shape[0], dtype=bool)
    if collar > 0:
        for b in ref_bounds:
            scored &= ~((mids > b - collar) & (mids < b + collar))
    ref_active = _activity(ref, ref.speakers, mids)
    hyp_active = _activity(hyp, hyp.speakers, mids)
    if overlap == "exclude":
        scored &= ref_active.sum(axis=1) <= 1
    return ScoredGrid(durations, scored, ref_active, hyp_active, ref.speakers, hyp.speakers)


def optimal_mapping(grid: ScoredGrid) -> Dict[str, str]:
    """Hungarian assignment on scored ref x hyp overlap durations"""
    if not grid.ref_speakers or not grid.hyp_speakers:
        return {}
    weights = (grid.durations * grid.scored)[:, None]
    overlap = (grid.ref_active * weights).T.astype(np.float64) @ grid.hyp_active.astype(np.float64)
    rows, cols = linear_sum_assignment(-overlap)
    return {grid.ref_speakers[r]: grid.hyp_speakers[c] for r, c in zip(rows, cols)}


def error_times(grid: ScoredGrid, mapping: Dict[str, str]) -> Tuple[float, float, float, float, float]:
    """(ref speech, miss, false alarm, confusion, scored duration) over scored intervals"""
    d = grid.durations * grid.scored
    n_ref = grid.ref_active.sum(axis=1) if grid.ref_active.size else np.zeros_like(d)
    n_hyp = grid.hyp_active.sum(axis=1) if grid.hyp_active.size else np.zeros_like(d)
    n_correct = np.zeros_like(d)
    hyp_index = {s: j for j, s in enumerate(grid.hyp_speakers)}
    for i, speaker in enumerate(grid.ref_speakers):
        if speaker in mapping:
            n_correct += grid.ref_active[:, i] & grid.hyp_active[:, hyp_index[mapping[speaker]]]
    t_ref = float((d * n_ref).sum())
    t_md = float((d * np.maximum(n_ref - n_hyp, 0)).sum())
    t_fa = float((d * np.maximum(n_hyp - n_ref, 0)).sum())
    t_sc = float((d * (np.minimum(n_ref, n_hyp) - n_correct)).sum())
    return t_ref, t_md, t_fa, t_sc, float(d.sum())


def der(ref: Timeline, hyp: Timeline, collar: float = 0.25, denominator: str = "ref_speech",
        overlap: str = "per_speaker") -> DerResult:
    cfg = ScoreConfig(collar, denominator, overlap)
    if not ref.turns:
        raise UndefinedDERError("reference timeline is empty")
    grid = build_grid(ref, hyp, cfg.collar, cfg.overlap)
    mapping = optimal_mapping(grid)
    t_ref, t_md, t_fa, t_sc, t_scored = error_times(grid, mapping)
    total = t_ref if cfg.denominator == "ref_speech" else t_scored
    if total <= 0:
        raise UndefinedDERError("no scored reference time left after the collar")
    return DerResult.from_times(total, t_md, t_fa, t_sc)
