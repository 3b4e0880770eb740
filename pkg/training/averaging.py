import logging
from typing import List, Sequence, Tuple

import numpy as np

from sond.checkpoint import load_checkpoint
from sond.config import ModelConfig
from sond.params import Params
from utils.errors import ConfigError

logger = logging.getLogger(__name__)


def average_params(snapshots: Sequence[Params]) -> Params:
    if not snapshots:
        raise ConfigError("nothing to average")
    out = snapshots[0].zeros_like()
    for snap in snapshots:
        if snap.names != out.names:
            raise ConfigError("snapshots hold different tensors")
        for name, t in snap.items():
            out[name] = out[name] + t
    for name, t in out.items():
        out[name] = t / len(snapshots)
    return out


def average_checkpoints(paths: Sequence[str]) -> Tuple[ModelConfig, Params]:
    """Arithmetic mean of every tensor over checkpoints sharing one config"""
    loaded = [load_checkpoint(path) for path in paths]
    if not loaded:
        raise ConfigError("no checkpoints given")
    cfg = loaded[0][0]
    for path, (other, _) in zip(paths, loaded):
        if other != cfg:
            raise ConfigError(f"checkpoint {path} has a different model config")
    logger.info("Averaging %d checkpoints", len(loaded))
    return cfg, average_params([params for _, params in loaded])


def select_and_average(snapshots: Sequence[Params], dev_scores: Sequence[float], top: int = 5) -> Params:
    """Average the `top` snapshots with the lowest dev-set DER"""
    if len(snapshots) != len(dev_scores):
        raise ConfigError("one dev score per snapshot is required")
    order: List[int] = list(np.argsort(np.asarray(dev_scores), kind="stable")[:max(1, top)])
    logger.info("Averaging snapshots %s (dev DER %s)", order, [round(dev_scores[i], 2) for i in order])
    return average_params([snapshots[i] for i in order])
