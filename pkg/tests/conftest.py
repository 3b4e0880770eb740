import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from sond.config import ModelConfig  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_cfg():
    """T=8-friendly model: N=3 slots, K=2, E=8, one CD layer, two SCN layers"""
    return ModelConfig(feat_dim=6, profile_dim=5, emb_dim=8, n_slots=3, max_overlap=2, pool_window=4,
                       conv_channels=(4,), conv_kernel=3, speaker_layers=2, cd_layers=1, attn_dim=8,
                       attn_heads=2, cd_ff_dim=6, scn_layers=2, scn_ff_dim=5, look_back=2, look_ahead=2)
