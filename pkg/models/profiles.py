from dataclasses import dataclass
from typing import Optional

import numpy as np

from utils.errors import ShapeError, TooManySpeakersError


@dataclass
class ProfileSet:
    """
    N fixed speaker slots of P-dim embeddings. Slots beyond the detected
    speakers are zero vectors with valid_mask False.
    """
    vectors: np.ndarray
    valid_mask: np.ndarray

    def __post_init__(self):
        self.vectors = np.array(self.vectors, dtype=np.float64)
        self.valid_mask = np.asarray(self.valid_mask, dtype=bool).reshape(-1)
        if self.vectors.ndim != 2 or self.vectors.shape[0] != self.valid_mask.shape[0]:
            raise ShapeError("profile vectors and mask disagree", self.vectors.shape, self.valid_mask.shape)
        # invalid slots are exactly zero
        self.vectors[~self.valid_mask] = 0.0

    @classmethod
    def from_vectors(cls, vectors: np.ndarray, n_slots: int, dim: Optional[int] = None) -> "ProfileSet":
        vectors = np.asarray(vectors, dtype=np.float64)
        if vectors.ndim != 2:
            vectors = np.zeros((0, dim or 0))
        k, dim = vectors.shape
        if k > n_slots:
            raise TooManySpeakersError(f"{k} profiles do not fit into {n_slots} slots")
        padded = np.zeros((n_slots, dim))
        mask = np.zeros(n_slots, dtype=bool)
        padded[:k] = vectors
        mask[:k] = True
        return cls(padded, mask)

    @property
    def n_slots(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    @property
    def n_valid(self) -> int:
        return int(self.valid_mask.sum())

    def permute(self, order) -> "ProfileSet":
        order = list(order)
        return ProfileSet(self.vectors[order], self.valid_mask[order])
