"""
Spectral clustering on the normalized symmetric Laplacian
L = I - D^-1/2 A D^-1/2, with the speaker count taken from the largest
eigengap.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import scipy.linalg
from sklearn.cluster import KMeans

from clustering.affinity import AffinityMatrix
from utils.errors import ClusteringError, ConfigError, NumericError, ShapeError

logger = logging.getLogger(__name__)

MAX_RESEEDS = 5


@dataclass
class ClusterResult:
    assignments: np.ndarray
    k: int
    centroids: np.ndarray

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.assignments, minlength=self.k)

    def first_occurrence(self) -> np.ndarray:
        return np.array([int(np.flatnonzero(self.assignments == c)[0]) for c in range(self.k)])


def normalized_laplacian(A: np.ndarray) -> np.ndarray:
    degree = A.sum(axis=1)
    inv_sqrt = np.zeros_like(degree)
    positive = degree > 0
    inv_sqrt[positive] = 1.0 / np.sqrt(degree[positive])
    return np.eye(A.shape[0]) - inv_sqrt[:, None] * A * inv_sqrt[None, :]


def laplacian_spectrum(A: AffinityMatrix) -> Tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and matching eigenvectors"""
    try:
        return scipy.linalg.eigh(normalized_laplacian(A.data))
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericError(f"eigen decomposition failed: {exc}") from exc


def estimate_k(A: AffinityMatrix, k_max: int) -> int:
    """argmax_k (lambda_{k+1} - lambda_k) over k = 1..k_max; ties go to the smaller k"""
    m = A.m
    if k_max < 1 or k_max > m:
        raise ConfigError(f"k_max must lie in [1, {m}], got {k_max}")
    if m == 1:
        return 1
    vals, _ = laplacian_spectrum(A)
    upper = min(k_max, m - 1)
    gaps = vals[1:upper + 1] - vals[:upper]
    k = int(np.argmax(gaps)) + 1
    logger.debug("Eigengaps %s -> k=%d", np.round(gaps, 4).tolist(), k)
    return k


def _relabel(labels: np.ndarray) -> np.ndarray:
    """Renumber clusters in order of first appearance"""
    mapping = {}
    for label in labels:
        mapping.setdefault(int(label), len(mapping))
    return np.array([mapping[int(label)] for label in labels], dtype=np.int64)


def spectral_cluster(A: AffinityMatrix, k: int, seed: int = 0, embeddings: Optional[np.ndarray] = None,
                     max_iter: int = 100) -> ClusterResult:
    """
    Partition the rows of the k smallest Laplacian eigenvectors with k-means.
    Centroids are means of the original embeddings (A.source unless given).
    """
    m = A.m
    if not 1 <= k <= m:
        raise ConfigError(f"k must lie in [1, {m}], got {k}")
    E = embeddings if embeddings is not None else A.source
    if E is None:
        raise ClusteringError("centroids need the embeddings the affinity was built from")
    E = np.asarray(E, dtype=np.float64)
    if E.shape[0] != m:
        raise ShapeError("embeddings and affinity disagree", E.shape, A.data.shape)

    if k == 1:
        labels = np.zeros(m, dtype=np.int64)
    elif k == m:
        labels = np.arange(m, dtype=np.int64)
    else:
        _, vecs = laplacian_spectrum(A)
        U = vecs[:, :k]
        norms = np.linalg.norm(U, axis=1, keepdims=True)
        U = U / np.where(norms > 0, norms, 1.0)
        labels = None
        for attempt in range(MAX_RESEEDS + 1):
            km = KMeans(n_clusters=k, init="k-means++", n_init=1, max_iter=max_iter,
                        random_state=seed + attempt)
            candidate = km.fit_predict(U)
            if np.bincount(candidate, minlength=k).min() > 0:
                labels = _relabel(candidate)
                break
            logger.warning("k-means left an empty cluster (attempt %d), re-seeding", attempt + 1)
        if labels is None:
            raise ClusteringError(f"k-means produced an empty cluster after {MAX_RESEEDS} re-seeds")

    centroids = np.vstack([E[labels == c].mean(axis=0) for c in range(k)])
    return ClusterResult(assignments=labels, k=k, centroids=centroids)
