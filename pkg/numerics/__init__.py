"""
Float64 kernels and the finite-difference gradient oracle
"""

from .kernels import (
    affine,
    softmax,
    sigmoid,
    layer_norm,
    cosine,
    cosine_matrix,
    windowed_stat_pool,
    global_stat_pool,
    median_filter,
    memory_block,
)

from .gradcheck import GradCheckReport, grad_check

__all__ = [
    'affine',
    'softmax',
    'sigmoid',
    'layer_norm',
    'cosine',
    'cosine_matrix',
    'windowed_stat_pool',
    'global_stat_pool',
    'median_filter',
    'memory_block',
    'GradCheckReport',
    'grad_check',
]
