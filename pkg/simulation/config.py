from dataclasses import dataclass

from encoding.pse_codec import PseConfig
from utils.config import dataclass_from_dict
from utils.errors import ConfigError


@dataclass(frozen=True)
class TurnStats:
    """Log-normal run lengths (seconds) of one speaker's talk and silence"""
    talk_median_s: float = 2.0
    talk_sigma: float = 0.5
    silence_median_s: float = 5.1
    silence_sigma: float = 0.5

    def __post_init__(self):
        if min(self.talk_median_s, self.silence_median_s) <= 0:
            raise ConfigError("run-length medians must be positive")
        if min(self.talk_sigma, self.silence_sigma) < 0:
            raise ConfigError("run-length sigmas must be >= 0")


@dataclass(frozen=True)
class SimConfig:
    n_slots: int = 16
    max_overlap: int = 4
    feat_dim: int = 80
    frame_rate: int = 100
    duration_s: float = 16.0
    speakers_per_sample: int = 4
    speaker_bank: int = 40
    distractors: int = 2
    feature_sigma: float = 1.0
    mean_scale: float = 1.0
    min_separation: float = 4.0
    noise_floor: float = 0.3
    profile_noise: float = 0.05
    talk_median_s: float = 2.0
    talk_sigma: float = 0.5
    silence_median_s: float = 5.1
    silence_sigma: float = 0.5
    finetune_talk_median_s: float = 1.2
    finetune_silence_median_s: float = 3.0
    max_resample: int = 100
    shuffle_slots: bool = True
    seed: int = 0

    def __post_init__(self):
        PseConfig(self.n_slots, self.max_overlap)
        used = self.speakers_per_sample + self.distractors
        if self.speakers_per_sample < 0 or self.distractors < 0:
            raise ConfigError("speaker counts must be >= 0")
        if used > self.n_slots:
            raise ConfigError(f"{used} speakers per sample do not fit into {self.n_slots} slots")
        if used > self.speaker_bank:
            raise ConfigError(f"speaker bank of {self.speaker_bank} cannot supply {used} distinct speakers")
        if self.duration_s * self.frame_rate < 1:
            raise ConfigError("samples must hold at least one frame")

    @property
    def T(self) -> int:
        return int(round(self.duration_s * self.frame_rate))

    @property
    def pse(self) -> PseConfig:
        return PseConfig(self.n_slots, self.max_overlap)

    def turn_stats(self, finetune: bool = False) -> TurnStats:
        if finetune:
            return TurnStats(self.finetune_talk_median_s, self.talk_sigma,
                             self.finetune_silence_median_s, self.silence_sigma)
        return TurnStats(self.talk_median_s, self.talk_sigma, self.silence_median_s, self.silence_sigma)

    @classmethod
    def from_dict(cls, data) -> "SimConfig":
        return dataclass_from_dict(cls, data)
