"""
Readers and writers for RTTM, features, VAD, embeddings, labels, profiles and manifests
"""

from .rttm import parse_rttm, parse_rttm_files, emit_rttm, read_rttm, write_rttm
from .formats import (
    read_features,
    write_features,
    read_vad,
    write_vad,
    read_embeddings,
    write_embeddings,
    read_labels,
    write_labels,
    read_profiles,
    write_profiles,
)
from .manifest import ManifestEntry, read_manifest, write_manifest, load_sample, load_dataset

__all__ = [
    'parse_rttm',
    'parse_rttm_files',
    'emit_rttm',
    'read_rttm',
    'write_rttm',
    'read_features',
    'write_features',
    'read_vad',
    'write_vad',
    'read_embeddings',
    'write_embeddings',
    'read_labels',
    'write_labels',
    'read_profiles',
    'write_profiles',
    'ManifestEntry',
    'read_manifest',
    'write_manifest',
    'load_sample',
    'load_dataset',
]
