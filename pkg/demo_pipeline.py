"""
Desk-scale walk through the whole toolkit: simulate training segments,
train a small SOND model briefly, diarize a simulated recording and score it.
"""

import logging

from evaluation.der import der
from parsers.rttm import emit_rttm
from pipeline import PipelineConfig, diarize
from simulation.config import SimConfig
from simulation.dataset import simulate_dataset
from simulation.recording import simulate_recording
from sond.config import ModelConfig
from sond.model import SondModel
from training.config import TrainConfig
from training.trainer import train
from utils.logging_setup import setup_logging

logger = logging.getLogger(__name__)


def main():
    setup_logging("INFO")
    sim_cfg = SimConfig(n_slots=4, max_overlap=2, feat_dim=16, duration_s=4.0, speakers_per_sample=2,
                        speaker_bank=8, distractors=1, seed=7)
    model_cfg = ModelConfig(feat_dim=16, profile_dim=16, emb_dim=16, n_slots=4, max_overlap=2,
                            conv_channels=(16,), attn_dim=16, attn_heads=2, cd_ff_dim=32, cd_layers=1,
                            scn_layers=2, scn_ff_dim=16, look_back=5, look_ahead=5)
    train_cfg = TrainConfig(stage=2, learning_rate=3e-3, batch_size=4, max_steps=150, log_every=25,
                            eval_every=0, seed=7)

    samples = simulate_dataset(40, sim_cfg)
    model = SondModel(model_cfg, seed=7)
    result = train(samples, model, train_cfg)
    print(f"Final training loss: {result.curve[-1].total:.4f}")

    recording = simulate_recording(sim_cfg, duration_s=30.0, n_speakers=2, index=0)
    out = diarize(recording.features, recording.vad, model, PipelineConfig(iterations=2, segment_s=4.0,
                                                                          segment_shift_s=2.0))
    print(emit_rttm(out.timeline, "demo"), end="")
    for i, hyp in enumerate(out.history, 1):
        score = der(recording.reference, hyp, collar=0.25)
        print(f"iteration {i}: DER {score.der:.2f}% (MD {score.md:.2f} FA {score.fa:.2f} SC {score.sc:.2f})")


if __name__ == "__main__":
    main()
