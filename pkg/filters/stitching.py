"""
Merge per-segment posteriors into one recording-level hypothesis.

Overlapping segments are averaged frame-wise before the decision; each
speaker stream is then median-smoothed inside every covered region, cut
back to K speakers where smoothing created too many, and run-length
converted to turns.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from encoding.pse_codec import activity_table
from filters.smoothing import smooth_activity
from models.timeline import Timeline, activity_to_timeline
from sond.config import ModelConfig
from sond.model import limit_overlap, speaker_marginals
from utils.errors import ShapeError

logger = logging.getLogger(__name__)


@dataclass
class SegmentResult:
    start_frame: int
    posteriors: np.ndarray

    @property
    def end_frame(self) -> int:
        return self.start_frame + self.posteriors.shape[0]


@dataclass
class StitchResult:
    timeline: Timeline
    activity: np.ndarray
    covered: np.ndarray
    posteriors: np.ndarray


def average_posteriors(results: Sequence[SegmentResult], total_frames: int):
    """Frame-wise mean over the segments covering each frame, with the coverage mask"""
    if not results:
        return np.zeros((total_frames, 0)), np.zeros(total_frames, dtype=bool)
    width = results[0].posteriors.shape[1]
    total = np.zeros((total_frames, width))
    count = np.zeros(total_frames)
    for res in results:
        if res.posteriors.shape[1] != width:
            raise ShapeError("segments disagree on the posterior width", res.posteriors.shape, (width,))
        if res.start_frame < 0 or res.end_frame > total_frames:
            raise ShapeError(f"segment {res.start_frame}..{res.end_frame} outside the recording", (total_frames,))
        total[res.start_frame:res.end_frame] += res.posteriors
        count[res.start_frame:res.end_frame] += 1
    covered = count > 0
    total[covered] /= count[covered, None]
    return total, covered


def decide_activity(posteriors: np.ndarray, cfg: ModelConfig) -> np.ndarray:
    """Per-frame T x N decision: argmax class for the PSE head, 0.5 threshold otherwise"""
    if cfg.output_head == "pse":
        table = activity_table(cfg.pse)
        return table[np.argmax(posteriors, axis=1)].astype(np.uint8)
    acts = (posteriors > 0.5).astype(np.uint8)
    return limit_overlap(acts, posteriors, cfg.max_overlap)


def _covered_runs(covered: np.ndarray):
    edges = np.diff(np.concatenate(([0], covered.astype(np.int8), [0])))
    return zip(np.flatnonzero(edges == 1), np.flatnonzero(edges == -1))


def stitch(results: Sequence[SegmentResult], total_frames: int, cfg: ModelConfig,
           names: Optional[List[str]] = None, valid_mask: Optional[np.ndarray] = None,
           smooth_window: int = 129, min_turn_frames: int = 2, frame_s: float = 0.01) -> StitchResult:
    posteriors, covered = average_posteriors(results, total_frames)
    N = cfg.n_slots
    acts = np.zeros((total_frames, N), dtype=np.uint8)
    marginals = np.zeros((total_frames, N))
    if covered.any():
        marginals[covered] = speaker_marginals(posteriors[covered], cfg)
        acts[covered] = decide_activity(posteriors[covered], cfg)
    if valid_mask is not None:
        acts[:, ~np.asarray(valid_mask, dtype=bool)] = 0

    for start, end in _covered_runs(covered):
        acts[start:end] = smooth_activity(acts[start:end], smooth_window)
    acts = limit_overlap(acts, marginals, cfg.max_overlap)

    names = names if names is not None else [f"spk{n}" for n in range(N)]
    timeline = activity_to_timeline(acts, frame_s, names, min_frames=min_turn_frames)
    logger.debug("Stitched %d segments over %d frames into %d turns", len(results), total_frames, len(timeline))
    return StitchResult(timeline=timeline, activity=acts, covered=covered, posteriors=posteriors)
