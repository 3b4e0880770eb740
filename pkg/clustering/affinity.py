import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from numerics.kernels import DEGENERATE_NORM
from utils.errors import ConfigError, DegenerateEmbeddingError, ShapeError

logger = logging.getLogger(__name__)


@dataclass
class AffinityMatrix:
    """Symmetric m x m similarities in [0, 1] with unit diagonal"""
    data: np.ndarray
    # embeddings the matrix was built from, used for centroids
    source: Optional[np.ndarray] = None

    @property
    def m(self) -> int:
        return self.data.shape[0]


AffinityFn = Callable[[np.ndarray], AffinityMatrix]


def build_affinity(E: np.ndarray) -> AffinityMatrix:
    """Cosine similarity rescaled to [0, 1]: A[i, j] = (cos(e_i, e_j) + 1) / 2"""
    E = np.asarray(E, dtype=np.float64)
    if E.ndim != 2 or E.shape[0] < 1:
        raise ShapeError("embeddings must be a non-empty m x P matrix", E.shape)
    norms = np.linalg.norm(E, axis=1)
    degenerate = np.flatnonzero(norms < DEGENERATE_NORM)
    if degenerate.size:
        raise DegenerateEmbeddingError(int(degenerate[0]))
    U = E / norms[:, None]
    A = (U @ U.T + 1.0) / 2.0
    A = np.clip(0.5 * (A + A.T), 0.0, 1.0)
    np.fill_diagonal(A, 1.0)
    return AffinityMatrix(A, source=E)


def prune_affinity(A: AffinityMatrix, p_val: float) -> AffinityMatrix:
    """
    Keep the ceil(p_val * m) largest entries of each row (the diagonal is
    always kept), zero the rest and symmetrize.
    """
    if not 0.0 < p_val <= 1.0:
        raise ConfigError(f"p_val must lie in (0, 1], got {p_val}")
    m = A.m
    keep = min(m, max(1, math.ceil(p_val * m)))
    if keep == m:
        return AffinityMatrix(A.data.copy(), A.source)
    pruned = np.zeros_like(A.data)
    for i in range(m):
        row = A.data[i]
        top = np.argsort(-row, kind="stable")[:keep]
        pruned[i, top] = row[top]
        pruned[i, i] = row[i]
    pruned = 0.5 * (pruned + pruned.T)
    np.fill_diagonal(pruned, 1.0)
    logger.debug("Pruned affinity to %d entries per row (m=%d)", keep, m)
    return AffinityMatrix(pruned, A.source)
