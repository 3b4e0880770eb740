"""
Plain-text (and one binary) file formats exchanged between the CLI stages.

    features    #feat T=<t> D=<d>, then T rows of D decimals
                (binary: same header line, then T*D little-endian float64)
    vad         one voiced interval per line: start_s end_s
    embeddings  #emb m=<m> dim=<p>, then chunk_id start_s end_s v1 ... vp
    labels      #pse N=<n> K=<k> C=<c>, then one class index per line
    profiles    #prof n=<n> dim=<p>, then valid v1 ... vp per slot
"""

import logging
import re
from typing import Dict, List, Tuple

import numpy as np

from encoding.pse_codec import PseConfig
from models.activity import PSELabelSeq
from models.profiles import ProfileSet
from utils.errors import ParseError

logger = logging.getLogger(__name__)

_HEADER = re.compile(r"^#(\w+)((?:\s+\w+=\S+)*)\s*$")


def parse_header(line: str, kind: str, keys: Tuple[str, ...]) -> Dict[str, int]:
    match = _HEADER.match(line.strip())
    if not match or match.group(1) != kind:
        raise ParseError(f"expected a '#{kind}' header, got {line.strip()!r}", 1)
    fields = dict(item.split("=", 1) for item in match.group(2).split())
    try:
        values = {key: int(fields[key]) for key in keys}
    except (KeyError, ValueError):
        raise ParseError(f"header must define {', '.join(k + '=' for k in keys)}: {line.strip()!r}", 1)
    if any(v < 0 for v in values.values()):
        raise ParseError(f"negative size in header {line.strip()!r}", 1)
    return values


def _row(fields: List[str], line_no: int, width: int) -> np.ndarray:
    if len(fields) != width:
        raise ParseError(f"expected {width} values, got {len(fields)}", line_no)
    try:
        return np.array([float(v) for v in fields], dtype=np.float64)
    except ValueError:
        raise ParseError("non-numeric value", line_no)


def _body(text: str) -> List[Tuple[int, List[str]]]:
    """(line number, fields) of the non-empty lines after the header"""
    return [(no, line.split()) for no, line in enumerate(text.splitlines()[1:], 2) if line.strip()]


# ---------------------------------------------------------------- features

def parse_features(text: str) -> np.ndarray:
    lines = text.splitlines()
    if not lines:
        raise ParseError("empty feature file", 1)
    shape = parse_header(lines[0], "feat", ("T", "D"))
    rows = [_row(fields, no, shape["D"]) for no, fields in _body(text)]
    if len(rows) != shape["T"]:
        raise ParseError(f"header announces {shape['T']} frames, found {len(rows)}")
    return np.vstack(rows) if rows else np.zeros((0, shape["D"]))


def format_features(X: np.ndarray) -> str:
    T, D = X.shape
    body = "".join(" ".join(f"{v:.6g}" for v in row) + "\n" for row in X)
    return f"#feat T={T} D={D}\n" + body


def read_features(path: str, binary: bool = False) -> np.ndarray:
    if not binary:
        with open(path, "r", encoding="utf-8") as f:
            return parse_features(f.read())
    with open(path, "rb") as f:
        header = f.readline().decode("ascii", errors="replace")
        shape = parse_header(header, "feat", ("T", "D"))
        data = f.read()
    expected = shape["T"] * shape["D"] * 8
    if len(data) != expected:
        raise ParseError(f"binary payload has {len(data)} bytes, header implies {expected}")
    return np.frombuffer(data, dtype="<f8").astype(np.float64).reshape(shape["T"], shape["D"])


def write_features(path: str, X: np.ndarray, binary: bool = False) -> None:
    X = np.asarray(X, dtype=np.float64)
    if not binary:
        with open(path, "w", encoding="utf-8") as f:
            f.write(format_features(X))
        return
    with open(path, "wb") as f:
        f.write(f"#feat T={X.shape[0]} D={X.shape[1]}\n".encode("ascii"))
        f.write(np.ascontiguousarray(X, dtype="<f8").tobytes())


# ---------------------------------------------------------------- VAD

def parse_vad(text: str) -> List[Tuple[float, float]]:
    """Voiced intervals; must be sorted and non-overlapping"""
    intervals: List[Tuple[float, float]] = []
    for line_no, raw in enumerate(text.splitlines(), 1):
        fields = raw.split()
        if not fields or fields[0].startswith("#"):
            continue
        start, end = _row(fields, line_no, 2)
        if end <= start or start < 0:
            raise ParseError(f"bad interval {start}..{end}", line_no)
        if intervals and start < intervals[-1][1]:
            raise ParseError("intervals must be sorted and non-overlapping", line_no)
        intervals.append((float(start), float(end)))
    return intervals


def read_vad(path: str) -> List[Tuple[float, float]]:
    with open(path, "r", encoding="utf-8") as f:
        return parse_vad(f.read())


def write_vad(path: str, intervals: List[Tuple[float, float]]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for start, end in intervals:
            f.write(f"{start:.3f} {end:.3f}\n")


# ---------------------------------------------------------------- embeddings

def parse_embeddings(text: str) -> Tuple[List[str], np.ndarray, np.ndarray]:
    """(chunk ids, m x 2 intervals, m x p embeddings)"""
    lines = text.splitlines()
    if not lines:
        raise ParseError("empty embedding file", 1)
    shape = parse_header(lines[0], "emb", ("m", "dim"))
    ids, spans, vectors = [], [], []
    for no, fields in _body(text):
        if len(fields) != shape["dim"] + 3:
            raise ParseError(f"expected {shape['dim'] + 3} fields, got {len(fields)}", no)
        ids.append(fields[0])
        values = _row(fields[1:], no, shape["dim"] + 2)
        spans.append(values[:2])
        vectors.append(values[2:])
    if len(ids) != shape["m"]:
        raise ParseError(f"header announces {shape['m']} chunks, found {len(ids)}")
    dim = shape["dim"]
    return (ids, np.array(spans).reshape(-1, 2), np.array(vectors).reshape(-1, dim))


def format_embeddings(ids: List[str], spans: np.ndarray, E: np.ndarray) -> str:
    out = [f"#emb m={E.shape[0]} dim={E.shape[1]}"]
    for chunk_id, (start, end), vec in zip(ids, spans, E):
        out.append(f"{chunk_id} {start:.3f} {end:.3f} " + " ".join(f"{v:.8g}" for v in vec))
    return "\n".join(out) + "\n"


def read_embeddings(path: str) -> Tuple[List[str], np.ndarray, np.ndarray]:
    with open(path, "r", encoding="utf-8") as f:
        return parse_embeddings(f.read())


def write_embeddings(path: str, ids: List[str], spans: np.ndarray, E: np.ndarray) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(format_embeddings(ids, spans, E))


# ---------------------------------------------------------------- PSE labels

def parse_labels(text: str) -> Tuple[PseConfig, PSELabelSeq]:
    lines = text.splitlines()
    if not lines:
        raise ParseError("empty label file", 1)
    head = parse_header(lines[0], "pse", ("N", "K", "C"))
    cfg = PseConfig(head["N"], head["K"])
    if cfg.C != head["C"]:
        raise ParseError(f"C={head['C']} does not match N={cfg.N} K={cfg.K} (expected {cfg.C})", 1)
    labels = []
    for no, fields in _body(text):
        if len(fields) != 1 or not fields[0].isdigit():
            raise ParseError(f"expected one class index, got {' '.join(fields)!r}", no)
        value = int(fields[0])
        if value >= cfg.C:
            raise ParseError(f"class {value} outside [0, {cfg.C})", no)
        labels.append(value)
    return cfg, PSELabelSeq(np.array(labels, dtype=np.int64), cfg.C)


def format_labels(labels: PSELabelSeq, cfg: PseConfig) -> str:
    return f"#pse N={cfg.N} K={cfg.K} C={cfg.C}\n" + "".join(f"{int(v)}\n" for v in labels.labels)


def read_labels(path: str) -> Tuple[PseConfig, PSELabelSeq]:
    with open(path, "r", encoding="utf-8") as f:
        return parse_labels(f.read())


def write_labels(path: str, labels: PSELabelSeq, cfg: PseConfig) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(format_labels(labels, cfg))


# ---------------------------------------------------------------- profiles

def parse_profiles(text: str) -> ProfileSet:
    lines = text.splitlines()
    if not lines:
        raise ParseError("empty profile file", 1)
    shape = parse_header(lines[0], "prof", ("n", "dim"))
    vectors, mask = [], []
    for no, fields in _body(text):
        if len(fields) != shape["dim"] + 1 or fields[0] not in ("0", "1"):
            raise ParseError("expected a 0/1 validity flag followed by the vector", no)
        mask.append(fields[0] == "1")
        vectors.append(_row(fields[1:], no, shape["dim"]))
    if len(vectors) != shape["n"]:
        raise ParseError(f"header announces {shape['n']} slots, found {len(vectors)}")
    return ProfileSet(np.array(vectors).reshape(-1, shape["dim"]), np.array(mask, dtype=bool))


def format_profiles(profiles: ProfileSet) -> str:
    out = [f"#prof n={profiles.n_slots} dim={profiles.dim}"]
    for valid, vec in zip(profiles.valid_mask, profiles.vectors):
        out.append(f"{int(valid)} " + " ".join(f"{v:.10g}" for v in vec))
    return "\n".join(out) + "\n"


def read_profiles(path: str) -> ProfileSet:
    with open(path, "r", encoding="utf-8") as f:
        return parse_profiles(f.read())


def write_profiles(path: str, profiles: ProfileSet) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(format_profiles(profiles))
