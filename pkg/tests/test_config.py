import json

import pytest

from sond import ModelConfig
from simulation import SimConfig
from training import TrainConfig
from utils.config import DEFAULTS, apply_seed, dataclass_from_dict, load_config, parse_flat_config
from utils.errors import ConfigError


def test_defaults_build_every_section():
    config = load_config(None)
    assert ModelConfig.from_dict(config["model"]) == ModelConfig()
    assert TrainConfig.from_dict(config["training"]) == TrainConfig()
    assert SimConfig.from_dict(config["simulation"]) == SimConfig()


def test_loaded_config_does_not_alias_defaults():
    config = load_config(None)
    config["model"]["n_slots"] = 3
    assert DEFAULTS["model"]["n_slots"] == 16


def test_json_overrides_merge_with_defaults(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"model": {"emb_dim": 8}, "scoring": {"collar": 0.0}}))
    config = load_config(str(path))
    assert config["model"]["emb_dim"] == 8
    assert config["model"]["n_slots"] == 16
    assert config["scoring"]["collar"] == 0.0


def test_flat_config_values(tmp_path):
    parsed = parse_flat_config("model.conv_channels = 8, 8\n# comment\ntraining.learning_rate = none\n"
                               "model.use_cd = false\npipeline.p_val = 0.3\n")
    assert parsed == {"model": {"conv_channels": [8, 8], "use_cd": False},
                      "training": {"learning_rate": None}, "pipeline": {"p_val": 0.3}}
    with pytest.raises(ConfigError):
        parse_flat_config("no equals sign\n")
    path = tmp_path / "c.conf"
    path.write_text("model.conv_channels = 8, 8\n")
    assert ModelConfig.from_dict(load_config(str(path))["model"]).conv_channels == (8, 8)


def test_missing_config_file_raises(tmp_path):
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "absent.json"))


def test_seed_override_reaches_every_section(monkeypatch):
    config = apply_seed(load_config(None), 42)
    assert {config[s]["seed"] for s in ("training", "simulation", "pipeline")} == {42}
    monkeypatch.setenv("SOND_SEED", "7")
    monkeypatch.setenv("SOND_LOG_LEVEL", "DEBUG")
    config = load_config(None)
    assert config["pipeline"]["seed"] == 7
    assert config["logging"]["level"] == "DEBUG"


def test_dataclass_from_dict_ignores_unknown_keys():
    cfg = dataclass_from_dict(ModelConfig, {"n_slots": 4, "bogus": 1, "conv_channels": [3]})
    assert cfg.n_slots == 4 and cfg.conv_channels == (3,)
