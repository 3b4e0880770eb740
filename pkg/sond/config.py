from dataclasses import dataclass, asdict
from typing import Any, Dict, Tuple

from encoding.pse_codec import PseConfig, num_classes
from utils.config import dataclass_from_dict
from utils.errors import ConfigError

OUTPUT_HEADS = ("pse", "multilabel")


@dataclass(frozen=True)
class ModelConfig:
    """
    Shapes of the SOND network. Defaults are desk scale; a full-size
    model uses emb_dim=256, attn_dim=512, cd_ff_dim=1024, scn_ff_dim=512.
    """
    feat_dim: int = 80
    profile_dim: int = 80
    emb_dim: int = 32
    n_slots: int = 16
    max_overlap: int = 4
    pool_window: int = 20
    conv_channels: Tuple[int, ...] = (64, 64)
    conv_kernel: int = 3
    speaker_layers: int = 3
    cd_layers: int = 4
    attn_dim: int = 64
    attn_heads: int = 4
    cd_ff_dim: int = 128
    scn_layers: int = 6
    scn_ff_dim: int = 64
    look_back: int = 15
    look_ahead: int = 15
    use_ci: bool = True
    use_cd: bool = True
    output_head: str = "pse"
    ln_eps: float = 1e-8
    pool_eps: float = 1e-8

    def __post_init__(self):
        object.__setattr__(self, "conv_channels", tuple(int(c) for c in self.conv_channels))
        positive = {
            "feat_dim": self.feat_dim, "profile_dim": self.profile_dim, "emb_dim": self.emb_dim,
            "n_slots": self.n_slots, "pool_window": self.pool_window, "conv_kernel": self.conv_kernel,
            "attn_dim": self.attn_dim,
            "attn_heads": self.attn_heads, "cd_ff_dim": self.cd_ff_dim, "scn_ff_dim": self.scn_ff_dim,
        }
        for name, value in positive.items():
            if int(value) < 1:
                raise ConfigError(f"{name} must be >= 1, got {value}")
        if any(c < 1 for c in self.conv_channels):
            raise ConfigError(f"conv widths must be >= 1, got {self.conv_channels}")
        for name in ("speaker_layers", "cd_layers", "scn_layers", "look_back", "look_ahead"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        if self.speaker_layers == 0 and self.profile_dim != self.emb_dim:
            raise ConfigError(f"without speaker layers profiles feed the scorers directly, so profile_dim "
                              f"({self.profile_dim}) must equal emb_dim ({self.emb_dim})")
        if self.conv_kernel % 2 == 0:
            raise ConfigError(f"conv_kernel must be odd to preserve frame count, got {self.conv_kernel}")
        if self.attn_dim % self.attn_heads:
            raise ConfigError(f"attn_dim {self.attn_dim} not divisible by attn_heads {self.attn_heads}")
        if self.output_head not in OUTPUT_HEADS:
            raise ConfigError(f"output_head must be one of {OUTPUT_HEADS}, got {self.output_head!r}")
        if not (self.use_ci or self.use_cd):
            raise ConfigError("at least one of use_ci/use_cd must be enabled")
        # validates 1 <= K <= N
        PseConfig(self.n_slots, self.max_overlap)

    @property
    def pse(self) -> PseConfig:
        return PseConfig(self.n_slots, self.max_overlap)

    @property
    def num_classes(self) -> int:
        return num_classes(self.n_slots, self.max_overlap)

    @property
    def num_outputs(self) -> int:
        return self.num_classes if self.output_head == "pse" else self.n_slots

    @property
    def head_dim(self) -> int:
        return self.attn_dim // self.attn_heads

    @property
    def receptive_half_width(self) -> int:
        """Frames on each side of t that can influence the speech encoding at t"""
        return len(self.conv_channels) * (self.conv_kernel // 2) + self.pool_window // 2

    def to_dict(self) -> Dict[str, Any]:
        out = asdict(self)
        out["conv_channels"] = list(self.conv_channels)
        return out

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ModelConfig":
        return dataclass_from_dict(cls, data)
