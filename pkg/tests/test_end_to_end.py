import dataclasses

import numpy as np
import pytest

from evaluation import der, evaluate_samples
from pipeline import PipelineConfig, diarize
from simulation import SimConfig, simulate_dataset, simulate_recording
from sond import ModelConfig, SondModel
from training import TrainConfig, train

pytestmark = pytest.mark.slow

SIM = SimConfig(n_slots=4, max_overlap=2, feat_dim=16, duration_s=4.0, speakers_per_sample=2, speaker_bank=8,
                distractors=1, mean_scale=2.0, min_separation=4.0, seed=7)
MODEL = ModelConfig(feat_dim=16, profile_dim=16, emb_dim=16, n_slots=4, max_overlap=2, conv_channels=(16,),
                    attn_dim=16, attn_heads=2, cd_ff_dim=32, cd_layers=1, scn_layers=2, scn_ff_dim=16,
                    look_back=5, look_ahead=5)

# desk-scale model of the overfit and held-out checks
DESK = ModelConfig(feat_dim=16, profile_dim=16, emb_dim=32, n_slots=4, max_overlap=2, conv_channels=(32,),
                   attn_dim=64, attn_heads=4, cd_ff_dim=64, cd_layers=2, scn_layers=3, scn_ff_dim=64,
                   look_back=5, look_ahead=5)
DESK_TRAIN = TrainConfig(stage=2, learning_rate=3e-3, batch_size=4, max_steps=1500, eval_every=0, log_every=100,
                         seed=7)


@pytest.fixture(scope="module")
def trained():
    samples = simulate_dataset(40, SIM)
    model = SondModel(MODEL, seed=7)
    result = train(samples, model, TrainConfig(stage=2, learning_rate=3e-3, batch_size=4, max_steps=200,
                                               eval_every=0, seed=7))
    return model, result


@pytest.fixture(scope="module")
def desk_split():
    return simulate_dataset(50, SIM), simulate_dataset(20, SIM, start=50)


def _fit(head, train_set):
    model = SondModel(dataclasses.replace(DESK, output_head=head), seed=7)
    train(train_set, model, DESK_TRAIN)
    return model


@pytest.fixture(scope="module")
def desk_models(desk_split):
    train_set, _ = desk_split
    return {head: _fit(head, train_set) for head in ("pse", "multilabel")}


def test_training_loss_goes_down(trained):
    _, result = trained
    totals = np.array([loss.total for loss in result.curve])
    assert totals[-20:].mean() < totals[:20].mean()


def test_refinement_does_not_degrade(trained):
    model, _ = trained
    cfg = PipelineConfig(iterations=2, segment_s=4.0, segment_shift_s=2.0)
    first, second = [], []
    for index in range(10):
        rec = simulate_recording(SIM, duration_s=30.0, n_speakers=2, index=index)
        out = diarize(rec.features, rec.vad, model, cfg)
        assert len(out.history) == 2
        first.append(der(rec.reference, out.history[0], collar=0.25).der)
        second.append(der(rec.reference, out.history[1], collar=0.25).der)
    assert np.mean(second) <= np.mean(first) + 0.5


def test_overfit_training_set(desk_split, desk_models):
    train_set, _ = desk_split
    model = desk_models["pse"]
    score = evaluate_samples(train_set, model.params, model.cfg)
    assert score.frame_accuracy > 0.99
    assert score.der < 5.0


def test_held_out_der_and_power_set_head_not_worse(desk_split, desk_models):
    _, held_out = desk_split
    scores = {head: evaluate_samples(held_out, model.params, model.cfg).der
              for head, model in desk_models.items()}
    assert scores["pse"] < 20.0
    assert scores["pse"] <= scores["multilabel"]
