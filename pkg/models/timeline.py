from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, List, Sequence

import numpy as np

from utils.errors import OutOfRangeError


@dataclass(frozen=True)
class Turn:
    speaker: str
    start: float
    end: float

    def __post_init__(self):
        if not self.end > self.start:
            raise OutOfRangeError(f"turn of {self.speaker} has end {self.end} <= start {self.start}")

    @property
    def duration(self) -> float:
        return self.end - self.start


@dataclass
class Timeline:
    """Speaker turns of one recording; cross-speaker overlap is allowed"""
    turns: List[Turn] = field(default_factory=list)

    def add(self, speaker: str, start: float, end: float) -> None:
        self.turns.append(Turn(str(speaker), float(start), float(end)))

    @property
    def speakers(self) -> List[str]:
        return sorted({t.speaker for t in self.turns})

    def by_speaker(self) -> Dict[str, List[Turn]]:
        grouped: Dict[str, List[Turn]] = defaultdict(list)
        for turn in self.turns:
            grouped[turn.speaker].append(turn)
        return grouped

    def merged(self) -> "Timeline":
        """Merge overlapping or touching turns of the same speaker"""
        out = Timeline()
        for speaker, turns in sorted(self.by_speaker().items()):
            turns = sorted(turns, key=lambda t: t.start)
            cur_start, cur_end = turns[0].start, turns[0].end
            for turn in turns[1:]:
                if turn.start <= cur_end:
                    cur_end = max(cur_end, turn.end)
                else:
                    out.add(speaker, cur_start, cur_end)
                    cur_start, cur_end = turn.start, turn.end
            out.add(speaker, cur_start, cur_end)
        out.turns.sort(key=lambda t: (t.start, t.speaker))
        return out

    def total_speech(self) -> float:
        return sum(t.duration for t in self.merged().turns)

    def __len__(self) -> int:
        return len(self.turns)


def activity_to_timeline(acts: np.ndarray, frame_s: float = 0.01, names: Sequence[str] = None,
                         min_frames: int = 1, offset_frames: int = 0) -> Timeline:
    """Run-length convert a T x N binary matrix into turns, dropping runs shorter than min_frames"""
    acts = np.asarray(acts)
    T, N = acts.shape
    names = list(names) if names is not None else [f"spk{n}" for n in range(N)]
    timeline = Timeline()
    for n in range(N):
        col = np.concatenate(([0], acts[:, n].astype(np.int8), [0]))
        edges = np.diff(col)
        starts = np.flatnonzero(edges == 1)
        ends = np.flatnonzero(edges == -1)
        for s, e in zip(starts, ends):
            if e - s < min_frames:
                continue
            timeline.add(names[n], (s + offset_frames) * frame_s, (e + offset_frames) * frame_s)
    timeline.turns.sort(key=lambda t: (t.start, t.speaker))
    return timeline


def timeline_to_activity(timeline: Timeline, T: int, names: Sequence[str], frame_s: float = 0.01) -> np.ndarray:
    """Frame t is active when its centre falls inside a turn"""
    acts = np.zeros((T, len(names)), dtype=np.uint8)
    index = {name: i for i, name in enumerate(names)}
    centres = (np.arange(T) + 0.5) * frame_s
    for turn in timeline.turns:
        if turn.speaker not in index:
            continue
        acts[(centres >= turn.start) & (centres < turn.end), index[turn.speaker]] = 1
    return acts
