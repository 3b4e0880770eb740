from dataclasses import dataclass

import numpy as np

from utils.errors import ShapeError, OutOfRangeError


@dataclass
class ActivityMatrix:
    """Binary T x N matrix: data[t, n] == 1 when speaker slot n talks at frame t"""
    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim != 2:
            raise ShapeError("activity matrix must be 2-D", data.shape)
        if data.size and not np.isin(data, (0, 1)).all():
            raise OutOfRangeError("activity entries must be 0 or 1")
        self.data = data.astype(np.uint8)

    @property
    def T(self) -> int:
        return self.data.shape[0]

    @property
    def N(self) -> int:
        return self.data.shape[1]

    @property
    def popcounts(self) -> np.ndarray:
        return self.data.sum(axis=1).astype(np.int64)

    def overlap_ratio(self) -> float:
        """Overlapped speech frames divided by speech frames (0 without speech)"""
        counts = self.popcounts
        speech = int((counts >= 1).sum())
        if speech == 0:
            return 0.0
        return float((counts >= 2).sum()) / speech

    def permute_slots(self, order) -> "ActivityMatrix":
        return ActivityMatrix(self.data[:, list(order)])

    def __eq__(self, other) -> bool:
        return isinstance(other, ActivityMatrix) and np.array_equal(self.data, other.data)


@dataclass
class PSELabelSeq:
    """Per-frame dense power-set class indices in [0, num_classes)"""
    labels: np.ndarray
    num_classes: int

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64).reshape(-1)
        if labels.size and (labels.min() < 0 or labels.max() >= self.num_classes):
            bad = int(np.flatnonzero((labels < 0) | (labels >= self.num_classes))[0])
            raise OutOfRangeError(
                f"label {int(labels[bad])} at frame {bad} outside [0, {self.num_classes})")
        self.labels = labels

    def __len__(self) -> int:
        return int(self.labels.shape[0])

    def __eq__(self, other) -> bool:
        return (isinstance(other, PSELabelSeq) and self.num_classes == other.num_classes
                and np.array_equal(self.labels, other.labels))
