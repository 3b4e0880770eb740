"""
Recording-level diarization:

    VAD -> segment/chunk plan -> chunk embeddings -> spectral clustering
        -> profiles -> SOND per segment -> stitch + smooth -> timeline
        -> (re-estimate profiles from single-speaker frames, repeat)
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from clustering.profiles import cluster_recording
from filters.smoothing import odd_window
from filters.stitching import SegmentResult, StitchResult, stitch
from models.activity import PSELabelSeq
from models.profiles import ProfileSet
from models.timeline import Timeline
from numerics.kernels import global_stat_pool
from sond.model import SondModel
from sond.network import speech_global_embedding
from utils.config import dataclass_from_dict
from utils.errors import ConfigError, ShapeError
from utils.segmentation import Interval, SegmentPlan, plan_segments, to_frames

logger = logging.getLogger(__name__)

Extractor = Callable[[np.ndarray], np.ndarray]

EMBEDDINGS = ("frame_mean", "encoder")


@dataclass(frozen=True)
class PipelineConfig:
    frame_rate: int = 100
    segment_s: float = 16.0
    segment_shift_s: float = 4.0
    chunk_s: float = 1.28
    chunk_shift_s: float = 0.64
    smooth_window_s: float = 1.28
    min_turn_frames: int = 2
    iterations: int = 3
    p_val: float = 0.25
    kmeans_max_iter: int = 100
    workers: int = 1
    # "frame_mean" keeps profiles in feature space (profile_dim == feat_dim);
    # "encoder" pools the model's speech encoder (profile_dim == emb_dim)
    embedding: str = "frame_mean"
    seed: int = 0

    def __post_init__(self):
        if self.iterations < 1:
            raise ConfigError(f"iterations must be >= 1, got {self.iterations}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.embedding not in EMBEDDINGS:
            raise ConfigError(f"embedding must be one of {EMBEDDINGS}, got {self.embedding!r}")

    @property
    def frame_s(self) -> float:
        return 1.0 / self.frame_rate

    @classmethod
    def from_dict(cls, data) -> "PipelineConfig":
        return dataclass_from_dict(cls, data)


@dataclass
class PipelineResult:
    timeline: Timeline
    profiles: ProfileSet
    plan: SegmentPlan
    stitched: Optional[StitchResult] = None
    # one timeline per iteration, the last equals `timeline`
    history: List[Timeline] = field(default_factory=list)


def chunk_embedding(frames: np.ndarray) -> np.ndarray:
    """Mean of the chunk's frames (the mean half of global statistic pooling)"""
    return global_stat_pool(frames)[:frames.shape[1]]


def encoder_embedding(model: SondModel) -> Extractor:
    """Chunk embeddings from the model's own speech encoder with global pooling"""
    cfg = model.cfg
    if cfg.profile_dim != cfg.emb_dim:
        raise ConfigError(f"encoder embeddings are {cfg.emb_dim}-dim but the model expects "
                          f"{cfg.profile_dim}-dim profiles")

    def extract(frames: np.ndarray) -> np.ndarray:
        return speech_global_embedding(frames, model.params, cfg)

    return extract


def make_extractor(kind: str, model: Optional[SondModel] = None) -> Extractor:
    if kind == "frame_mean":
        return chunk_embedding
    if kind == "encoder":
        if model is None:
            raise ConfigError("encoder embeddings need a model")
        return encoder_embedding(model)
    raise ConfigError(f"embedding must be one of {EMBEDDINGS}, got {kind!r}")


def embed_chunks(features: np.ndarray, plan: SegmentPlan, model: Optional[SondModel] = None,
                 extractor: Optional[Extractor] = None,
                 frame_rate: int = 100) -> Tuple[List[str], np.ndarray, np.ndarray]:
    """
    (chunk ids, m x 2 spans in seconds, m x P embeddings) for the plan's
    chunks. With a model and no explicit extractor the model's speech
    encoder is used, otherwise the frame mean.
    """
    if extractor is None:
        extractor = encoder_embedding(model) if model is not None else chunk_embedding
    frame_s = 1.0 / frame_rate
    ids, spans, vectors = [], [], []
    for i, chunk in enumerate(plan.chunks):
        start, end = to_frames(chunk, frame_s)
        end = min(end, features.shape[0])
        if end - start < 1:
            logger.warning("Skipping chunk %d (%.2f-%.2f s): shorter than one frame", i, chunk[0], chunk[1])
            continue
        ids.append(f"c{i:05d}")
        spans.append(chunk)
        vectors.append(extractor(features[start:end]))
    dim = vectors[0].shape[0] if vectors else features.shape[1]
    return ids, np.array(spans, dtype=np.float64).reshape(-1, 2), np.array(vectors).reshape(-1, dim)


def infer_segment(model: SondModel, X: np.ndarray, profiles: ProfileSet) -> Tuple[PSELabelSeq, np.ndarray]:
    """Per-frame class decision and the posteriors kept for stitching"""
    return model.predict(X, profiles)


def refine_profiles(features: np.ndarray, activity: np.ndarray, previous: ProfileSet,
                    extractor: Extractor = chunk_embedding) -> ProfileSet:
    """
    Re-estimate each valid slot from the frames where it is the only active
    speaker; slots without such frames keep their previous profile.
    """
    single = activity.sum(axis=1) == 1
    vectors = previous.vectors.copy()
    refreshed = 0
    for n in np.flatnonzero(previous.valid_mask):
        frames = single & (activity[:, n] > 0)
        if not frames.any():
            logger.debug("Slot %d has no single-speaker frames, keeping its profile", n)
            continue
        vectors[n] = extractor(features[frames])
        refreshed += 1
    if refreshed == 0:
        logger.warning("No single-speaker frames in the hypothesis, keeping previous profiles")
        return previous
    return ProfileSet(vectors, previous.valid_mask.copy())


def _segment_frames(plan: SegmentPlan, total_frames: int, frame_s: float) -> List[Tuple[int, int]]:
    out = []
    for segment in plan.segments:
        start, end = to_frames(segment, frame_s)
        end = min(end, total_frames)
        if end - start >= 1:
            out.append((start, end))
    return out


def _infer_all(model: SondModel, features: np.ndarray, spans: Sequence[Tuple[int, int]],
               profiles: ProfileSet, workers: int) -> List[SegmentResult]:
    def run(span):
        start, end = span
        _, post = infer_segment(model, features[start:end], profiles)
        return SegmentResult(start, post)

    if workers > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            # map keeps the chronological order of the segments
            return list(pool.map(run, spans))
    return [run(span) for span in spans]


def diarize(features: np.ndarray, vad: Sequence[Interval], model: SondModel,
            cfg: Optional[PipelineConfig] = None, profiles: Optional[ProfileSet] = None) -> PipelineResult:
    """
    Diarize one recording. Profiles come from spectral clustering of the
    chunk embeddings unless given (e.g. oracle profiles), in which case the
    first iteration decodes with them directly.
    """
    cfg = cfg or PipelineConfig()
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2:
        raise ShapeError("features must be T x D", features.shape)
    N = model.cfg.n_slots
    names = [f"spk{n}" for n in range(N)]
    plan = plan_segments(vad, cfg.segment_s, cfg.segment_shift_s, cfg.chunk_s, cfg.chunk_shift_s, cfg.frame_s)
    spans = _segment_frames(plan, features.shape[0], cfg.frame_s)
    if not spans:
        logger.warning("No voiced segments to diarize")
        return PipelineResult(Timeline(), ProfileSet.from_vectors(np.zeros((0, features.shape[1])), N), plan)

    extractor = make_extractor(cfg.embedding, model)
    if profiles is None:
        _, _, E = embed_chunks(features, plan, extractor=extractor, frame_rate=cfg.frame_rate)
        _, profiles = cluster_recording(E, N, cfg.p_val, cfg.seed, max_iter=cfg.kmeans_max_iter)
    elif profiles.n_slots != N or profiles.vectors.shape[1] != model.cfg.profile_dim:
        raise ShapeError(f"profiles must be {N} x {model.cfg.profile_dim}", profiles.vectors.shape)
    window = odd_window(cfg.smooth_window_s, cfg.frame_rate)

    result = PipelineResult(Timeline(), profiles, plan)
    for iteration in range(cfg.iterations):
        segments = _infer_all(model, features, spans, profiles, cfg.workers)
        stitched = stitch(segments, features.shape[0], model.cfg, names, profiles.valid_mask,
                          window, cfg.min_turn_frames, cfg.frame_s)
        result.history.append(stitched.timeline)
        result.timeline, result.stitched, result.profiles = stitched.timeline, stitched, profiles
        logger.info("Iteration %d: %d turns from %d speakers", iteration + 1,
                    len(stitched.timeline), len(stitched.timeline.speakers))
        if iteration + 1 < cfg.iterations:
            profiles = refine_profiles(features, stitched.activity, profiles, extractor)
    return result


def run_pipeline(features: np.ndarray, vad: Sequence[Interval], model: SondModel, iterations: int = 3,
                 cfg: Optional[PipelineConfig] = None) -> Timeline:
    cfg = cfg or PipelineConfig()
    if iterations != cfg.iterations:
        cfg = replace(cfg, iterations=iterations)
    return diarize(features, vad, model, cfg).timeline
