"""
Sliding windows over voiced regions: long segments for the neural model,
short chunks for speaker embeddings. Windows never cross a region edge;
the last window of a region may be shorter than the others.
"""

import math
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

from utils.errors import ConfigError, OutOfRangeError

Interval = Tuple[float, float]

TIME_EPS = 1e-9
# tolerance, in frames, for boundaries that sit on the frame grid
GRID_EPS = 1e-6


@dataclass
class SegmentPlan:
    segments: List[Interval] = field(default_factory=list)
    chunks: List[Interval] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.segments)


def to_frames(interval: Interval, frame_s: float = 0.01) -> Tuple[int, int]:
    """Whole frames lying inside the interval: start rounds up, end rounds down"""
    start = math.ceil(interval[0] / frame_s - GRID_EPS)
    end = math.floor(interval[1] / frame_s + GRID_EPS)
    return int(start), int(max(end, start))


def check_vad(vad: Sequence[Interval]) -> None:
    prev_end = float("-inf")
    for start, end in vad:
        if end <= start:
            raise OutOfRangeError(f"voiced interval {start}..{end} is empty")
        if start < prev_end:
            raise OutOfRangeError("voiced intervals must be sorted and non-overlapping")
        prev_end = end


def windows(vad: Sequence[Interval], win_s: float, shift_s: float, frame_s: float = 0.01) -> List[Interval]:
    if win_s <= 0 or shift_s <= 0:
        raise ConfigError(f"window and shift must be positive, got {win_s}, {shift_s}")
    out: List[Interval] = []
    for start, end in vad:
        i = 0
        while True:
            w_start = start + i * shift_s
            w_end = min(w_start + win_s, end)
            f_start, f_end = to_frames((w_start, w_end), frame_s)
            if f_end - f_start >= 1:
                out.append((w_start, w_end))
            if w_end >= end - TIME_EPS:
                break
            i += 1
    return out


def plan_segments(vad: Sequence[Interval], win_s: float = 16.0, shift_s: float = 4.0,
                  chunk_s: float = 1.28, chunk_shift_s: float = 0.64, frame_s: float = 0.01) -> SegmentPlan:
    check_vad(vad)
    return SegmentPlan(
        segments=windows(vad, win_s, shift_s, frame_s),
        chunks=windows(vad, chunk_s, chunk_shift_s, frame_s),
    )
