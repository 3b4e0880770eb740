import logging
import os
from dataclasses import dataclass
from typing import List

from encoding.pse_codec import decode_sequence
from models.sim_sample import SimSample
from parsers.formats import read_features, read_labels, read_profiles
from utils.errors import ParseError, ShapeError

logger = logging.getLogger(__name__)


@dataclass
class ManifestEntry:
    sample_id: str
    feat_path: str
    label_path: str
    profile_path: str
    rttm_path: str

    def as_line(self) -> str:
        return " ".join((self.sample_id, self.feat_path, self.label_path, self.profile_path, self.rttm_path))


def read_manifest(path: str) -> List[ManifestEntry]:
    """Relative paths are resolved against the manifest's directory"""
    base = os.path.dirname(os.path.abspath(path))
    entries = []
    with open(path, "r", encoding="utf-8") as f:
        for line_no, raw in enumerate(f, 1):
            fields = raw.split()
            if not fields or fields[0].startswith("#"):
                continue
            if len(fields) != 5:
                raise ParseError(f"expected 5 fields, got {len(fields)}", line_no)
            paths = [p if os.path.isabs(p) else os.path.join(base, p) for p in fields[1:]]
            entries.append(ManifestEntry(fields[0], *paths))
    return entries


def write_manifest(path: str, entries: List[ManifestEntry]) -> None:
    base = os.path.dirname(os.path.abspath(path))
    with open(path, "w", encoding="utf-8") as f:
        for entry in entries:
            rel = [os.path.relpath(p, base) for p in (entry.feat_path, entry.label_path,
                                                      entry.profile_path, entry.rttm_path)]
            f.write(" ".join([entry.sample_id] + rel) + "\n")


def load_sample(entry: ManifestEntry, binary_features: bool = False) -> SimSample:
    features = read_features(entry.feat_path, binary=binary_features)
    cfg, labels = read_labels(entry.label_path)
    profiles = read_profiles(entry.profile_path)
    if len(labels) != features.shape[0]:
        raise ShapeError(f"{entry.sample_id}: labels and features differ in length",
                         (len(labels),), features.shape)
    if profiles.n_slots != cfg.N:
        raise ShapeError(f"{entry.sample_id}: profile slots differ from label N", (profiles.n_slots,), (cfg.N,))
    return SimSample(features=features, labels=decode_sequence(labels, cfg), profiles=profiles,
                     speaker_ids=[None] * cfg.N, sample_id=entry.sample_id)


def load_dataset(path: str, binary_features: bool = False) -> List[SimSample]:
    samples = [load_sample(entry, binary_features) for entry in read_manifest(path)]
    logger.info("Loaded %d samples from %s", len(samples), path)
    return samples
