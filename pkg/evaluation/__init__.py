"""
Diarization scoring
"""

from .der import ScoreConfig, der, build_grid, optimal_mapping
from .report import score_files, format_report
from .dataset import DatasetScore, evaluate_samples

__all__ = [
    'ScoreConfig',
    'der',
    'build_grid',
    'optimal_mapping',
    'score_files',
    'format_report',
    'DatasetScore',
    'evaluate_samples',
]
