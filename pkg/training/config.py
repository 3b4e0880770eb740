from dataclasses import dataclass, field
from typing import Any, Dict, Optional

from utils.config import dataclass_from_dict
from utils.errors import ConfigError

PAIR_MODES = ("ordered", "unordered", "literal")


@dataclass(frozen=True)
class TrainConfig:
    """
    Optimisation settings. Stage 1 trains with the speech encoder frozen,
    stage 2 unfreezes it, stage 3 fine-tunes at a lower rate on a second
    simulated distribution.
    """
    stage: int = 1
    lambda_sim: float = 1.0
    delta: float = 1.0
    pair_mode: str = "ordered"
    stage_lr: Dict[str, float] = field(default_factory=lambda: {"1": 1e-3, "2": 1e-4, "3": 1e-5})
    learning_rate: Optional[float] = None
    batch_size: int = 4
    max_steps: int = 2000
    freeze_speech_encoder: Optional[bool] = None
    grad_clip: float = 5.0
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    divergence_threshold: float = 1e6
    log_every: int = 10
    eval_every: int = 200
    average_top: int = 5
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.delta <= 1.0:
            raise ConfigError(f"similarity margin delta must lie in [0, 1], got {self.delta}")
        if self.pair_mode not in PAIR_MODES:
            raise ConfigError(f"pair_mode must be one of {PAIR_MODES}, got {self.pair_mode!r}")
        if self.stage not in (1, 2, 3):
            raise ConfigError(f"stage must be 1, 2 or 3, got {self.stage}")
        if self.lr <= 0:
            raise ConfigError(f"learning rate must be positive, got {self.lr}")
        if self.batch_size < 1 or self.max_steps < 0:
            raise ConfigError("batch_size must be >= 1 and max_steps >= 0")

    @property
    def lr(self) -> float:
        if self.learning_rate is not None:
            return float(self.learning_rate)
        return float(self.stage_lr.get(str(self.stage), self.stage_lr.get(self.stage, 1e-3)))

    @property
    def freeze(self) -> bool:
        if self.freeze_speech_encoder is None:
            return self.stage == 1
        return bool(self.freeze_speech_encoder)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TrainConfig":
        return dataclass_from_dict(cls, data)
