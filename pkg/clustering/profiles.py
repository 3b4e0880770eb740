import logging
from typing import Optional, Tuple

import numpy as np

from clustering.affinity import AffinityFn, build_affinity, prune_affinity
from clustering.spectral import ClusterResult, estimate_k, spectral_cluster
from models.profiles import ProfileSet
from utils.errors import ClusteringError, TooManySpeakersError

logger = logging.getLogger(__name__)


def extract_profiles(result: ClusterResult, N: int) -> ProfileSet:
    """Centroids by descending cluster size (ties: earliest chunk first), zero-padded to N slots"""
    if result.k > N:
        raise TooManySpeakersError(f"{result.k} clusters do not fit into {N} profile slots")
    sizes = result.sizes
    first = result.first_occurrence()
    order = sorted(range(result.k), key=lambda c: (-int(sizes[c]), int(first[c])))
    return ProfileSet.from_vectors(result.centroids[order], N)


def cluster_recording(E: np.ndarray, N: int, p_val: float = 0.25, seed: int = 0,
                      affinity_fn: Optional[AffinityFn] = None,
                      max_iter: int = 100) -> Tuple[ClusterResult, ProfileSet]:
    """Affinity, pruning, speaker counting, spectral clustering and padding for one recording"""
    E = np.asarray(E, dtype=np.float64)
    m = E.shape[0]
    if m == 0:
        raise ClusteringError("no chunk embeddings to cluster")
    if m == 1:
        result = ClusterResult(np.zeros(1, dtype=np.int64), 1, E.copy())
    else:
        affinity = (affinity_fn or build_affinity)(E)
        pruned = prune_affinity(affinity, p_val)
        k = estimate_k(pruned, min(N, m))
        result = spectral_cluster(pruned, k, seed, embeddings=E, max_iter=max_iter)
    logger.info("Clustered %d chunks into %d speakers (sizes %s)", m, result.k, result.sizes.tolist())
    return result, extract_profiles(result, N)
