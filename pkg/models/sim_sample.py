from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .activity import ActivityMatrix
from .profiles import ProfileSet


@dataclass
class SimSample:
    """One simulated segment: features, slot-aligned labels and profiles"""
    features: np.ndarray
    labels: ActivityMatrix
    profiles: ProfileSet
    # bank id per slot, None for padded slots
    speaker_ids: List[Optional[int]] = field(default_factory=list)
    sample_id: str = ""

    @property
    def T(self) -> int:
        return self.features.shape[0]

    @property
    def active_slots(self) -> List[int]:
        return [n for n in range(self.labels.N) if self.labels.data[:, n].any()]
