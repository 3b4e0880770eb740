import dataclasses

import numpy as np
import pytest

from models.activity import ActivityMatrix, PSELabelSeq
from models.profiles import ProfileSet
from models.sim_sample import SimSample
from numerics.gradcheck import grad_check
from sond import SondModel, forward_pass, init_params
from sond.params import Params
from training.averaging import average_checkpoints, average_params, select_and_average
from training.config import TrainConfig
from training.losses import LossBreakdown, ce_grad_logits, ce_loss, objective, similarity_loss
from training.optimizer import Adam, clip_grad_norm
from training.trainer import Trainer, sample_grads, train
from sond.checkpoint import load_checkpoint, save_checkpoint
from utils.errors import ConfigError, OutOfRangeError, TrainingDivergedError


def _sample(cfg, seed, T=8, valid=2):
    rng = np.random.default_rng(seed)
    labels = np.zeros((T, cfg.n_slots), dtype=np.uint8)
    for t in range(T):
        k = rng.integers(0, min(valid, cfg.max_overlap) + 1)
        if k:
            labels[t, rng.choice(valid, size=k, replace=False)] = 1
    profiles = ProfileSet.from_vectors(rng.normal(size=(valid, cfg.profile_dim)), cfg.n_slots)
    return SimSample(rng.normal(size=(T, cfg.feat_dim)), ActivityMatrix(labels), profiles,
                     sample_id=f"s{seed}")


def test_config_validation():
    with pytest.raises(ConfigError):
        TrainConfig(delta=1.5)
    with pytest.raises(ConfigError):
        TrainConfig(pair_mode="all")
    with pytest.raises(ConfigError):
        TrainConfig(stage=4)
    assert TrainConfig(stage=2).lr == pytest.approx(1e-4)
    assert TrainConfig(stage=1).freeze and not TrainConfig(stage=2).freeze
    assert TrainConfig(stage=3, learning_rate=0.5).lr == 0.5


def test_ce_of_uniform_posteriors_is_log_c():
    C = 7
    post = np.full((5, C), 1.0 / C)
    labels = PSELabelSeq(np.array([0, 1, 2, 3, 6]), C)
    assert ce_loss(post, labels) == pytest.approx(np.log(C))


def test_ce_gradient_and_label_range():
    post = np.array([[0.7, 0.2, 0.1]])
    np.testing.assert_allclose(ce_grad_logits(post, np.array([0])), [[-0.3, 0.2, 0.1]])
    assert ce_loss(np.array([[1.0, 0.0]]), np.array([1])) == pytest.approx(-np.log(1e-12))
    with pytest.raises(OutOfRangeError):
        ce_loss(post, np.array([3]))


def test_similarity_loss_values():
    mask = np.array([True, True, False])
    orthogonal = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
    assert similarity_loss(orthogonal, mask, 1.0) == pytest.approx(0.0)
    same = np.array([[1.0, 2.0], [1.0, 2.0], [5.0, 5.0]])
    assert similarity_loss(same, mask, 1.0, "ordered") == pytest.approx(2.0)
    assert similarity_loss(same, mask, 1.0, "unordered") == pytest.approx(1.0)
    assert similarity_loss(same, mask, 1.0, "literal") == pytest.approx(4.0)
    # a margin of 0 leaves only pairs that are identical, which contribute 0
    assert similarity_loss(same, mask, 0.0) == pytest.approx(0.0)


def test_total_is_linear_in_lambda(tiny_cfg):
    sample = _sample(tiny_cfg, 0)
    result = forward_pass(sample.features, sample.profiles, init_params(tiny_cfg, 0), tiny_cfg)
    totals = []
    for lam in (0.0, 1.0, 2.5):
        loss, _, _ = objective(result, sample.labels, tiny_cfg, TrainConfig(lambda_sim=lam))
        totals.append(loss.total)
        assert loss.total == pytest.approx(loss.ce + lam * loss.sim)
    assert totals[2] - totals[0] == pytest.approx(2.5 * (totals[1] - totals[0]))
    assert LossBreakdown.combine(1.0, 2.0, 0.5).total == 2.0


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_network_gradients_match_finite_differences(tiny_cfg, seed):
    cfg = dataclasses.replace(tiny_cfg, scn_ff_dim=8)
    train_cfg = TrainConfig(stage=2, lambda_sim=0.5)
    sample = _sample(cfg, 100 + seed)
    names = init_params(cfg, seed).names

    def loss_fn(tensors):
        params = Params()
        for name in names:
            params[name] = tensors[name]
        loss, grads = sample_grads(sample, params, cfg, train_cfg)
        return loss.total, dict(grads.items())

    start = dict(init_params(cfg, seed).items())
    report = grad_check(loss_fn, start, h=1e-5, tol=1e-4, max_entries=12, seed=seed, kink_tol=1e-4)
    assert report.passed, report.worst
    assert report.checked >= report.param_count // 2


def test_frozen_speech_encoder_gets_zero_gradient_and_stays_put(tiny_cfg):
    params = init_params(tiny_cfg, 4)
    sample = _sample(tiny_cfg, 4)
    stage1 = TrainConfig(stage=1, batch_size=1)
    _, grads = sample_grads(sample, params, tiny_cfg, stage1)
    for name in params.group("speech."):
        np.testing.assert_array_equal(grads[name], 0.0)

    trainer = Trainer(tiny_cfg, stage1, params)
    for _ in range(3):
        trainer.step([sample])
    for name in params.group("speech."):
        np.testing.assert_array_equal(trainer.params[name], params[name])
    assert not np.array_equal(trainer.params["out.W"], params["out.W"])
    assert trainer.get_statistics()["steps"] == 3


def test_clip_grad_norm():
    grads = Params()
    grads["a"] = np.array([3.0, 4.0])
    clipped, norm = clip_grad_norm(grads, 1.0)
    assert norm == pytest.approx(5.0)
    np.testing.assert_allclose(clipped["a"], [0.6, 0.8])


def test_adam_first_step_moves_by_lr():
    params = Params()
    params["w"] = np.array([1.0, -1.0])
    grads = Params()
    grads["w"] = np.array([0.5, -2.0])
    Adam().step(params, grads, lr=0.1)
    np.testing.assert_allclose(params["w"], [0.9, -0.9], atol=1e-6)


def test_averaging_opposite_snapshots_gives_zero(tiny_cfg, tmp_path):
    theta = init_params(tiny_cfg, 5)
    neg = theta.copy()
    for name, t in neg.items():
        neg[name] = -t
    avg = average_params([theta, neg])
    for name, t in avg.items():
        np.testing.assert_allclose(t, 0.0, atol=1e-15)

    paths = []
    for i, snap in enumerate([theta, neg]):
        path = str(tmp_path / f"{i}.ckpt")
        save_checkpoint(path, snap, tiny_cfg)
        paths.append(path)
    cfg, avg = average_checkpoints(paths)
    assert cfg == tiny_cfg
    np.testing.assert_allclose(avg["out.W"], 0.0, atol=1e-15)


def test_select_and_average_takes_lowest_scores(tiny_cfg):
    snaps = []
    for value in (1.0, 2.0, 3.0):
        p = init_params(tiny_cfg, 0)
        for name, t in p.items():
            p[name] = np.full_like(t, value)
        snaps.append(p)
    avg = select_and_average(snaps, [30.0, 10.0, 20.0], top=2)
    np.testing.assert_allclose(avg["out.b"], 2.5)
    with pytest.raises(ConfigError):
        select_and_average(snaps, [1.0], top=1)


def test_training_is_deterministic(tiny_cfg, tmp_path):
    data = [_sample(tiny_cfg, s) for s in range(5)]
    cfg = TrainConfig(stage=2, learning_rate=1e-2, batch_size=2, max_steps=6, eval_every=0)
    curves = []
    for run in range(2):
        model = SondModel(tiny_cfg, seed=7)
        result = train(data, model, cfg, log_path=str(tmp_path / f"log{run}.tsv"))
        curves.append([loss.total for loss in result.curve])
        assert result.steps == 6
    assert curves[0] == curves[1]
    lines = (tmp_path / "log0.tsv").read_text().splitlines()
    assert lines[0].split("\t") == ["step", "ce", "sim", "total", "lr"]
    assert len(lines) == 7


def test_snapshots_and_dev_selection(tiny_cfg, tmp_path):
    data = [_sample(tiny_cfg, s) for s in range(4)]
    dev = [_sample(tiny_cfg, 50)]
    cfg = TrainConfig(stage=2, learning_rate=1e-2, batch_size=2, max_steps=4, eval_every=2, average_top=1)
    model = SondModel(tiny_cfg, seed=0)
    result = train(data, model, cfg, dev=dev, checkpoint_dir=str(tmp_path))
    assert result.snapshot_steps == [2, 4]
    assert len(result.dev_scores) == 2
    assert (tmp_path / "step000002.ckpt").exists()
    best = int(np.argmin(result.dev_scores))
    for name in result.params:
        np.testing.assert_allclose(result.params[name], result.snapshots[best][name])
    assert model.params is result.params


def test_empty_training_set(tiny_cfg):
    with pytest.raises(ConfigError):
        train([], SondModel(tiny_cfg), TrainConfig())


@pytest.mark.slow
def test_overfits_a_single_sample(tiny_cfg):
    sample = _sample(tiny_cfg, 9, T=16)
    cfg = TrainConfig(stage=2, learning_rate=1e-2, batch_size=1, max_steps=300, eval_every=0, lambda_sim=0.0)
    model = SondModel(tiny_cfg, seed=0)
    result = train([sample], model, cfg)
    assert result.curve[-1].ce < 0.1 * result.curve[0].ce


def test_dev_evaluation_scores(tiny_cfg):
    from evaluation import evaluate_samples

    params = init_params(tiny_cfg, 0)
    silent = _sample(tiny_cfg, 60, valid=0)
    score = evaluate_samples([silent], params, tiny_cfg)
    assert np.isnan(score.der)
    assert 0.0 <= score.frame_accuracy <= 1.0
    score = evaluate_samples([_sample(tiny_cfg, s) for s in range(3)], params, tiny_cfg)
    assert score.samples == 3 and score.frames == 24
    assert score.der >= 0.0


def test_similarity_loss_grows_with_margin(rng):
    Vbar = np.abs(rng.normal(size=(3, 4)))
    mask = np.array([True, True, True])
    values = [similarity_loss(Vbar, mask, delta) for delta in np.linspace(0.0, 1.0, 6)]
    assert all(b >= a for a, b in zip(values, values[1:]))


def test_non_finite_forward_aborts_with_initial_checkpoint(tiny_cfg, tmp_path):
    broken = _sample(tiny_cfg, 3)
    broken.features[2, 0] = np.nan
    model = SondModel(tiny_cfg, seed=4)
    initial = model.params.copy()
    with pytest.raises(TrainingDivergedError) as info:
        train([broken], model, TrainConfig(stage=2, batch_size=1, max_steps=3, eval_every=0),
              checkpoint_dir=str(tmp_path))
    assert info.value.step == 1
    _, saved = load_checkpoint(str(tmp_path / "last_good.ckpt"))
    for name in initial:
        np.testing.assert_array_equal(saved[name], initial[name])


def test_exploding_learning_rate_saves_last_good(tiny_cfg, tmp_path):
    data = [_sample(tiny_cfg, s) for s in range(3)]
    cfg = TrainConfig(stage=2, learning_rate=1e150, batch_size=2, max_steps=10, eval_every=0)
    with pytest.raises(TrainingDivergedError) as info:
        train(data, SondModel(tiny_cfg, seed=0), cfg, checkpoint_dir=str(tmp_path))
    assert info.value.step > 1
    _, saved = load_checkpoint(str(tmp_path / "last_good.ckpt"))
    assert all(np.isfinite(saved[name]).all() for name in saved)
