"""
Mini-batch training of a SOND model with Adam.

Each step draws batch_size samples without replacement (reshuffling once
the dataset is exhausted), averages losses and gradients over the batch,
clips the global gradient norm and applies one Adam update. Snapshots are
taken every eval_every steps; with a dev set the final parameters are the
mean of the average_top snapshots with the lowest dev DER.
"""

import logging
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from evaluation.dataset import evaluate_samples
from models.sim_sample import SimSample
from sond.checkpoint import save_checkpoint
from sond.config import ModelConfig
from sond.model import SondModel
from sond.network import backward_pass, forward_pass
from sond.params import Params, SPEECH_PREFIX
from training.averaging import select_and_average
from training.config import TrainConfig
from training.losses import LossBreakdown, objective
from training.optimizer import Adam, clip_grad_norm
from utils.errors import ConfigError, NumericError, TrainingDivergedError

logger = logging.getLogger(__name__)

LOG_HEADER = "step\tce\tsim\ttotal\tlr"


@dataclass
class TrainResult:
    params: Params
    curve: List[LossBreakdown] = field(default_factory=list)
    snapshots: List[Params] = field(default_factory=list)
    snapshot_steps: List[int] = field(default_factory=list)
    dev_scores: List[float] = field(default_factory=list)
    steps: int = 0


def sample_grads(sample: SimSample, params: Params, model_cfg: ModelConfig,
                 train_cfg: TrainConfig) -> Tuple[LossBreakdown, Params]:
    """Loss and gradient of one sample"""
    result = forward_pass(sample.features, sample.profiles, params, model_cfg)
    loss, dlogits, dVbar = objective(result, sample.labels, model_cfg, train_cfg)
    grads = backward_pass(result, dlogits, params, model_cfg, dVbar_extra=dVbar,
                          freeze_speech=train_cfg.freeze)
    return loss, grads


def batch_grads(batch: Sequence[SimSample], params: Params, model_cfg: ModelConfig,
                train_cfg: TrainConfig) -> Tuple[LossBreakdown, Params]:
    """Batch-mean loss and gradient"""
    if not batch:
        raise ConfigError("empty batch")
    total = params.zeros_like()
    ce = sim = 0.0
    for sample in batch:
        loss, grads = sample_grads(sample, params, model_cfg, train_cfg)
        ce += loss.ce
        sim += loss.sim
        for name, g in grads.items():
            total[name] = total[name] + g
    scale = 1.0 / len(batch)
    for name, g in total.items():
        total[name] = g * scale
    return LossBreakdown.combine(ce * scale, sim * scale, train_cfg.lambda_sim), total


def backward(batch: Sequence[SimSample], params: Params, model_cfg: ModelConfig,
             train_cfg: TrainConfig) -> Params:
    """Batch-mean gradient for every tensor in params"""
    return batch_grads(batch, params, model_cfg, train_cfg)[1]


class Trainer:
    """Owns the parameters, the optimiser state and the batch sampler"""

    def __init__(self, model_cfg: ModelConfig, train_cfg: TrainConfig, params: Params):
        self.model_cfg = model_cfg
        self.cfg = train_cfg
        self.params = params.copy()
        self.optimizer = Adam(train_cfg.beta1, train_cfg.beta2, train_cfg.adam_eps)
        self.rng = np.random.default_rng(train_cfg.seed)
        self.frozen = params.group(SPEECH_PREFIX) if train_cfg.freeze else []
        self.step_count = 0
        self.last_good = self.params.copy()
        self._order: List[int] = []
        self.stats = {
            'steps': 0,
            'samples_seen': 0,
            'clipped_steps': 0,
            'last_grad_norm': 0.0,
        }

    def next_batch(self, dataset: Sequence[SimSample]) -> List[SimSample]:
        batch = []
        size = min(self.cfg.batch_size, len(dataset))
        while len(batch) < size:
            if not self._order:
                self._order = list(self.rng.permutation(len(dataset)))
            batch.append(dataset[self._order.pop()])
        return batch

    def step(self, batch: Sequence[SimSample]) -> LossBreakdown:
        self.step_count += 1
        try:
            loss, grads = batch_grads(batch, self.params, self.model_cfg, self.cfg)
        except NumericError as exc:
            logger.warning("Non-finite values at step %d: %s", self.step_count, exc)
            raise TrainingDivergedError(self.step_count, float("nan"), last_good=self.last_good.copy()) from exc
        if not np.isfinite(loss.total) or loss.total > self.cfg.divergence_threshold:
            raise TrainingDivergedError(self.step_count, loss.total, last_good=self.last_good.copy())
        # last parameters whose loss was finite and below the threshold
        self.last_good = self.params.copy()
        grads, norm = clip_grad_norm(grads, self.cfg.grad_clip)
        if not np.isfinite(norm):
            raise TrainingDivergedError(self.step_count, loss.total, last_good=self.last_good.copy())
        self.optimizer.step(self.params, grads, self.cfg.lr, frozen=self.frozen)

        self.stats['steps'] += 1
        self.stats['samples_seen'] += len(batch)
        self.stats['last_grad_norm'] = norm
        if norm > self.cfg.grad_clip:
            self.stats['clipped_steps'] += 1
        return loss

    def get_statistics(self) -> Dict:
        return dict(self.stats)


def train(dataset: Sequence[SimSample], model: SondModel, cfg: TrainConfig,
          dev: Optional[Sequence[SimSample]] = None, log_path: Optional[str] = None,
          checkpoint_dir: Optional[str] = None) -> TrainResult:
    """
    Run cfg.max_steps optimisation steps on model.params and return the
    trained (or snapshot-averaged) parameters. The model is updated in place.
    """
    if not dataset:
        raise ConfigError("training set is empty")
    trainer = Trainer(model.cfg, cfg, model.params)
    result = TrainResult(params=trainer.params)
    log_file = open(log_path, "w", encoding="utf-8") if log_path else None
    if checkpoint_dir:
        os.makedirs(checkpoint_dir, exist_ok=True)
    logger.info("Training stage %d for %d steps (lr=%g, frozen speech encoder=%s)",
                cfg.stage, cfg.max_steps, cfg.lr, cfg.freeze)
    try:
        if log_file:
            log_file.write(LOG_HEADER + "\n")
        for _ in range(cfg.max_steps):
            try:
                loss = trainer.step(trainer.next_batch(dataset))
            except TrainingDivergedError as exc:
                if checkpoint_dir:
                    save_checkpoint(os.path.join(checkpoint_dir, "last_good.ckpt"), exc.last_good, model.cfg)
                logger.error("%s", exc)
                raise
            step = trainer.step_count
            result.curve.append(loss)
            if log_file:
                log_file.write(loss.as_row(step, cfg.lr) + "\n")
            if step % max(1, cfg.log_every) == 0:
                logger.info("step %d ce %.4f sim %.4f total %.4f", step, loss.ce, loss.sim, loss.total)
            if cfg.eval_every > 0 and step % cfg.eval_every == 0:
                _snapshot(trainer, result, step, dev, checkpoint_dir)
    finally:
        if log_file:
            log_file.close()

    result.steps = trainer.step_count
    result.params = trainer.params
    if dev and len(result.snapshots) > 1:
        result.params = select_and_average(result.snapshots, result.dev_scores, cfg.average_top)
    model.params = result.params
    logger.info("Training finished after %d steps: %s", result.steps, trainer.get_statistics())
    return result


def _snapshot(trainer: Trainer, result: TrainResult, step: int,
              dev: Optional[Sequence[SimSample]], checkpoint_dir: Optional[str]) -> None:
    snap = trainer.params.copy()
    result.snapshots.append(snap)
    result.snapshot_steps.append(step)
    if dev:
        score = evaluate_samples(dev, snap, trainer.model_cfg)
        dev_der = score.der if np.isfinite(score.der) else 100.0 * (1.0 - score.frame_accuracy)
        result.dev_scores.append(dev_der)
        logger.info("step %d dev DER %.2f frame accuracy %.4f", step, dev_der, score.frame_accuracy)
    if checkpoint_dir:
        save_checkpoint(os.path.join(checkpoint_dir, f"step{step:06d}.ckpt"), snap, trainer.model_cfg)
