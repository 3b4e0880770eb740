"""
Configuration, error taxonomy, logging setup and VAD segmentation
"""

from .errors import (
    SondError,
    ConfigError,
    ShapeError,
    OutOfRangeError,
    OverlapExceededError,
    ParseError,
    DegenerateEmbeddingError,
    TooManySpeakersError,
    UndefinedDERError,
    CheckpointError,
    NumericError,
    GradCheckError,
    ClusteringError,
    SimulationError,
    TrainingDivergedError,
)
from .config import DEFAULTS, load_config, apply_seed, parse_flat_config, dataclass_from_dict
from .logging_setup import setup_logging
from .segmentation import Interval, SegmentPlan, to_frames, check_vad, windows, plan_segments

__all__ = [
    'SondError',
    'ConfigError',
    'ShapeError',
    'OutOfRangeError',
    'OverlapExceededError',
    'ParseError',
    'DegenerateEmbeddingError',
    'TooManySpeakersError',
    'UndefinedDERError',
    'CheckpointError',
    'NumericError',
    'GradCheckError',
    'ClusteringError',
    'SimulationError',
    'TrainingDivergedError',
    'DEFAULTS',
    'load_config',
    'apply_seed',
    'parse_flat_config',
    'dataclass_from_dict',
    'setup_logging',
    'Interval',
    'SegmentPlan',
    'to_frames',
    'check_vad',
    'windows',
    'plan_segments',
]
