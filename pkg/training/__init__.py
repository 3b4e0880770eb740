"""
Losses, optimiser and the staged training loop
"""

from .config import TrainConfig, PAIR_MODES
from .losses import (
    LossBreakdown,
    ce_loss,
    bce_loss,
    similarity_loss,
    similarity_loss_and_grad,
    objective,
    total_loss,
)
from .optimizer import Adam, clip_grad_norm
from .averaging import average_params, average_checkpoints, select_and_average
from .trainer import Trainer, TrainResult, sample_grads, batch_grads, backward, train

__all__ = [
    'TrainConfig',
    'PAIR_MODES',
    'LossBreakdown',
    'ce_loss',
    'bce_loss',
    'similarity_loss',
    'similarity_loss_and_grad',
    'objective',
    'total_loss',
    'Adam',
    'clip_grad_norm',
    'average_params',
    'average_checkpoints',
    'select_and_average',
    'Trainer',
    'TrainResult',
    'sample_grads',
    'batch_grads',
    'backward',
    'train',
]
