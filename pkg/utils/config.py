import os
import json
import logging
import dataclasses
from typing import Any, Dict, Optional, Type, TypeVar

from utils.errors import ConfigError

logger = logging.getLogger(__name__)

T = TypeVar("T")


DEFAULTS: Dict[str, Any] = {
    "model": {
        # full-size model: emb_dim 256, attn_dim 512, cd_ff_dim 1024, scn_ff_dim 512
        "feat_dim": 80,
        "profile_dim": 80,
        "emb_dim": 32,
        "n_slots": 16,
        "max_overlap": 4,
        "pool_window": 20,
        "conv_channels": [64, 64],
        "conv_kernel": 3,
        "speaker_layers": 3,
        "cd_layers": 4,
        "attn_dim": 64,
        "attn_heads": 4,
        "cd_ff_dim": 128,
        "scn_layers": 6,
        "scn_ff_dim": 64,
        "look_back": 15,
        "look_ahead": 15,
        "use_ci": True,
        "use_cd": True,
        "output_head": "pse",
        "ln_eps": 1e-8,
        "pool_eps": 1e-8,
    },
    "training": {
        "stage": 1,
        "lambda_sim": 1.0,
        "delta": 1.0,
        "pair_mode": "ordered",
        "stage_lr": {"1": 1e-3, "2": 1e-4, "3": 1e-5},
        "learning_rate": None,
        "batch_size": 4,
        "max_steps": 2000,
        "freeze_speech_encoder": None,
        "grad_clip": 5.0,
        "beta1": 0.9,
        "beta2": 0.999,
        "adam_eps": 1e-8,
        "divergence_threshold": 1e6,
        "log_every": 10,
        "eval_every": 200,
        "average_top": 5,
        "seed": 0,
    },
    "simulation": {
        "n_slots": 16,
        "max_overlap": 4,
        "feat_dim": 80,
        "frame_rate": 100,
        "duration_s": 16.0,
        "speakers_per_sample": 4,
        "speaker_bank": 40,
        "distractors": 2,
        "feature_sigma": 1.0,
        "mean_scale": 1.0,
        "min_separation": 4.0,
        "noise_floor": 0.3,
        "profile_noise": 0.05,
        "talk_median_s": 2.0,
        "talk_sigma": 0.5,
        "silence_median_s": 5.1,
        "silence_sigma": 0.5,
        "finetune_talk_median_s": 1.2,
        "finetune_silence_median_s": 3.0,
        "max_resample": 100,
        "shuffle_slots": True,
        "seed": 0,
    },
    "pipeline": {
        "frame_rate": 100,
        "segment_s": 16.0,
        "segment_shift_s": 4.0,
        "chunk_s": 1.28,
        "chunk_shift_s": 0.64,
        "smooth_window_s": 1.28,
        "min_turn_frames": 2,
        "iterations": 3,
        "p_val": 0.25,
        "kmeans_max_iter": 100,
        "workers": 1,
        "embedding": "frame_mean",
        "seed": 0,
    },
    "scoring": {
        "collar": 0.25,
        "denominator": "ref_speech",
        "overlap": "per_speaker",
    },
    "logging": {
        "level": "INFO"
    }
}


def load_config(config_path: Optional[str] = None) -> Dict[str, Any]:
    """
    Load configuration from a JSON or flat key=value file if present,
    otherwise return defaults. Environment variables prefixed SOND_ override
    the log level and the global seed.
    """
    config = _merge(DEFAULTS, {})

    path = config_path or os.environ.get("SOND_CONFIG", os.path.join(os.path.dirname(__file__), "..", "config.json"))
    path = os.path.abspath(path)
    if config_path and not os.path.exists(path):
        raise ConfigError(f"config file not found: {config_path}")
    if os.path.exists(path):
        try:
            with open(path, "r", encoding="utf-8") as f:
                text = f.read()
            data = json.loads(text) if path.endswith(".json") else parse_flat_config(text)
            config = _merge(config, data)
        except (OSError, ValueError) as exc:
            if config_path:
                raise ConfigError(f"cannot read config {path}: {exc}") from exc
            # Fall back to defaults on any read/parse error
            logger.warning("Ignoring unreadable config %s: %s", path, exc)

    env_level = os.environ.get("SOND_LOG_LEVEL")
    if env_level:
        config["logging"]["level"] = env_level
    env_seed = os.environ.get("SOND_SEED")
    if env_seed is not None:
        apply_seed(config, int(env_seed))

    return config


def apply_seed(config: Dict[str, Any], seed: int) -> Dict[str, Any]:
    for section in ("training", "simulation", "pipeline"):
        config.setdefault(section, {})["seed"] = seed
    return config


def parse_flat_config(text: str) -> Dict[str, Any]:
    """Parse `section.key = value` lines into a nested dict."""
    out: Dict[str, Any] = {}
    for line_no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {line_no}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        node = out
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = _parse_value(value)
    return out


def _parse_value(value: str) -> Any:
    lowered = value.lower()
    if lowered in ("true", "yes", "on"):
        return True
    if lowered in ("false", "no", "off"):
        return False
    if lowered in ("none", "null", ""):
        return None
    if "," in value:
        return [_parse_value(v.strip()) for v in value.split(",") if v.strip()]
    for cast in (int, float):
        try:
            return cast(value)
        except ValueError:
            pass
    return value


def dataclass_from_dict(cls: Type[T], data: Optional[Dict[str, Any]]) -> T:
    """Build a config dataclass, ignoring unknown keys and tupling lists."""
    data = data or {}
    names = {f.name for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in data.items():
        if key not in names:
            continue
        kwargs[key] = tuple(value) if isinstance(value, list) else value
    return cls(**kwargs)


def _merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    out = dict(base)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    # copy nested defaults so callers can mutate freely
    for k, v in out.items():
        if isinstance(v, dict) and k not in override:
            out[k] = _merge(v, {})
    return out
