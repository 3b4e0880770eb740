import argparse
import logging
import os
import sys

from clustering.profiles import cluster_recording
from evaluation.der import ScoreConfig
from evaluation.report import format_report, score_files
from models.timeline import Timeline
from parsers.formats import read_embeddings, read_features, read_profiles, read_vad, write_profiles, format_profiles
from parsers.manifest import load_dataset
from parsers.rttm import emit_rttm, read_rttm
from pipeline import PipelineConfig, diarize
from simulation.config import SimConfig
from simulation.dataset import simulate_dataset, write_corpus
from sond.config import ModelConfig
from sond.model import SondModel
from training.config import TrainConfig
from training.trainer import train
from utils.config import apply_seed, load_config
from utils.errors import SondError
from utils.logging_setup import setup_logging

logger = logging.getLogger(__name__)


def _emit(text: str, output: str = None) -> None:
    if output:
        with open(output, "w", encoding="utf-8") as f:
            f.write(text)
        print(f"Written to {output}")
    else:
        sys.stdout.write(text)


def cmd_simulate(args, config) -> None:
    sim_cfg = SimConfig.from_dict(config["simulation"])
    samples = simulate_dataset(args.count, sim_cfg, finetune=args.finetune)
    out_dir = args.output or "sim_corpus"
    manifest = write_corpus(samples, out_dir, sim_cfg, binary_features=args.binary_features)
    print(manifest)


def cmd_train(args, config) -> None:
    train_section = dict(config["training"])
    if args.stage:
        train_section["stage"] = args.stage
    if args.steps is not None:
        train_section["max_steps"] = args.steps
    train_cfg = TrainConfig.from_dict(train_section)
    if args.init:
        model = SondModel.load(args.init)
    else:
        model = SondModel(ModelConfig.from_dict(config["model"]), seed=train_cfg.seed)
    dataset = load_dataset(args.manifest, args.binary_features)
    dev = load_dataset(args.dev, args.binary_features) if args.dev else None
    result = train(dataset, model, train_cfg, dev=dev, log_path=args.log, checkpoint_dir=args.checkpoint_dir)
    out = args.output or f"sond_stage{train_cfg.stage}.ckpt"
    model.save(out)
    final = result.curve[-1] if result.curve else None
    print(f"{out}\tsteps={result.steps}" + (f"\tloss={final.total:.4f}" if final else ""))


def cmd_infer(args, config) -> None:
    section = dict(config["pipeline"])
    if args.iterations is not None:
        section["iterations"] = args.iterations
    if args.embedding:
        section["embedding"] = args.embedding
    pipe_cfg = PipelineConfig.from_dict(section)
    model = SondModel.load(args.checkpoint)
    features = read_features(args.features, binary=args.binary_features)
    vad = read_vad(args.vad)
    profiles = read_profiles(args.profiles) if args.profiles else None
    result = diarize(features, vad, model, pipe_cfg, profiles=profiles)
    file_id = args.file_id or os.path.splitext(os.path.basename(args.features))[0]
    _emit(emit_rttm(result.timeline, file_id), args.output)


def cmd_score(args, config) -> None:
    section = dict(config["scoring"])
    for key in ("collar", "denominator", "overlap"):
        if getattr(args, key) is not None:
            section[key] = getattr(args, key)
    score_cfg = ScoreConfig.from_dict(section)
    refs = read_rttm(args.ref)
    hyps = read_rttm(args.hyp)
    pairs = {file_id: (ref, hyps.get(file_id, Timeline())) for file_id, ref in refs.items()}
    _emit(format_report(score_files(pairs, score_cfg)), args.output)


def cmd_cluster(args, config) -> None:
    n_slots = args.slots or config["model"]["n_slots"]
    _, _, E = read_embeddings(args.embeddings)
    p_val = config["pipeline"]["p_val"]
    _, profiles = cluster_recording(E, n_slots, p_val, config["pipeline"]["seed"])
    if args.output:
        write_profiles(args.output, profiles)
        print(f"{profiles.n_valid} speakers written to {args.output}")
    else:
        sys.stdout.write(format_profiles(profiles))


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", help="Path to config (JSON or key=value)", default=None)
    shared.add_argument("--seed", type=int, default=None, help="Override every seed in the config")
    shared.add_argument("--log-level", default=None, help="Logging level (DEBUG, INFO, WARNING)")
    shared.add_argument("--output", default=None, help="Write the result here instead of stdout")

    parser = argparse.ArgumentParser(description="Overlap-aware speaker diarization toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[shared], help="Emit a simulated training corpus")
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--finetune", action="store_true", help="Use the fine-tuning turn statistics")
    p.add_argument("--binary-features", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("train", parents=[shared], help="Train a SOND model on a manifest")
    p.add_argument("manifest")
    p.add_argument("--stage", type=int, choices=(1, 2, 3), default=None)
    p.add_argument("--init", default=None, help="Checkpoint to start from")
    p.add_argument("--dev", default=None, help="Dev manifest for snapshot selection")
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--log", default=None, help="Per-step training log")
    p.add_argument("--checkpoint-dir", default=None)
    p.add_argument("--binary-features", action="store_true")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("infer", parents=[shared], help="Diarize one recording into RTTM")
    p.add_argument("features")
    p.add_argument("vad")
    p.add_argument("checkpoint")
    p.add_argument("--iterations", type=int, default=None)
    p.add_argument("--embedding", choices=("frame_mean", "encoder"), default=None,
                   help="Chunk embedding extractor used for clustering")
    p.add_argument("--profiles", default=None, help="Decode with these profiles instead of clustering")
    p.add_argument("--file-id", default=None)
    p.add_argument("--binary-features", action="store_true")
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("score", parents=[shared], help="DER table of a hypothesis against a reference")
    p.add_argument("ref")
    p.add_argument("hyp")
    p.add_argument("--collar", type=float, default=None)
    p.add_argument("--denominator", choices=("ref_speech", "scored_time"), default=None)
    p.add_argument("--overlap", choices=("per_speaker", "exclude"), default=None)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("cluster", parents=[shared], help="Cluster chunk embeddings into speaker profiles")
    p.add_argument("embeddings")
    p.add_argument("--slots", type=int, default=None)
    p.set_defaults(func=cmd_cluster)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    try:
        config = load_config(args.config)
    except SondError as exc:
        setup_logging("ERROR")
        logger.error("%s", exc)
        return 1
    if args.seed is not None:
        apply_seed(config, args.seed)
    if args.log_level:
        config.setdefault('logging', {})['level'] = args.log_level

    setup_logging(config.get('logging', {}).get('level', 'INFO'))

    try:
        args.func(args, config)
    except (SondError, OSError) as exc:
        logger.error("%s failed: %s", args.command, exc)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
