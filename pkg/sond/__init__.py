"""
Speaker overlap-aware neural diarization (SOND) model
"""

from .config import ModelConfig
from .params import Params, init_params, param_shapes
from .network import (
    ScoreTensor,
    ForwardResult,
    speech_encode,
    speech_global_embedding,
    speaker_encode,
    ci_score,
    cd_score,
    scn_combine,
    forward,
    forward_pass,
    backward_pass,
)
from .checkpoint import save_checkpoint, load_checkpoint
from .model import SondModel, decode_posteriors, speaker_marginals, limit_overlap
from numerics.kernels import memory_block

__all__ = [
    'ModelConfig',
    'Params',
    'init_params',
    'param_shapes',
    'ScoreTensor',
    'ForwardResult',
    'speech_encode',
    'speech_global_embedding',
    'speaker_encode',
    'ci_score',
    'cd_score',
    'memory_block',
    'scn_combine',
    'forward',
    'forward_pass',
    'backward_pass',
    'save_checkpoint',
    'load_checkpoint',
    'SondModel',
    'decode_posteriors',
    'speaker_marginals',
    'limit_overlap',
]
