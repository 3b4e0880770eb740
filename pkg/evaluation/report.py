import logging
from typing import Dict, List, Tuple

from evaluation.der import ScoreConfig, build_grid, error_times, optimal_mapping
from models.der_result import DerResult
from models.timeline import Timeline
from utils.errors import UndefinedDERError

logger = logging.getLogger(__name__)

HEADER = "file\tDER\tMD\tFA\tSC\ttotal_s"


def score_files(pairs: Dict[str, Tuple[Timeline, Timeline]], cfg: ScoreConfig) -> List[Tuple[str, DerResult]]:
    """Per-file DER plus an ALL row pooling the error times of every file"""
    rows: List[Tuple[str, DerResult]] = []
    pooled = [0.0, 0.0, 0.0, 0.0]
    for file_id in sorted(pairs):
        ref, hyp = pairs[file_id]
        if not ref.turns:
            logger.warning("Skipping %s: empty reference", file_id)
            continue
        grid = build_grid(ref, hyp, cfg.collar, cfg.overlap)
        t_ref, t_md, t_fa, t_sc, t_scored = error_times(grid, optimal_mapping(grid))
        total = t_ref if cfg.denominator == "ref_speech" else t_scored
        if total <= 0:
            logger.warning("Skipping %s: nothing scored", file_id)
            continue
        rows.append((file_id, DerResult.from_times(total, t_md, t_fa, t_sc)))
        for k, value in enumerate((total, t_md, t_fa, t_sc)):
            pooled[k] += value
    if not rows:
        raise UndefinedDERError("no file could be scored")
    rows.append(("ALL", DerResult.from_times(*pooled)))
    return rows


def format_report(rows: List[Tuple[str, DerResult]]) -> str:
    return "\n".join([HEADER] + [result.as_row(file_id) for file_id, result in rows]) + "\n"
