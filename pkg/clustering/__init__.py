"""
Speaker profile extraction by spectral clustering of chunk embeddings
"""

from .affinity import AffinityMatrix, build_affinity, prune_affinity
from .spectral import ClusterResult, normalized_laplacian, estimate_k, spectral_cluster
from .profiles import extract_profiles, cluster_recording

__all__ = [
    'AffinityMatrix',
    'build_affinity',
    'prune_affinity',
    'ClusterResult',
    'normalized_laplacian',
    'estimate_k',
    'spectral_cluster',
    'extract_profiles',
    'cluster_recording',
]
