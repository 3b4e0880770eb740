"""
RTTM reading and writing. Only SPEAKER records are produced; other record
types are skipped on input.

    SPEAKER <file> 1 <tbeg> <tdur> <NA> <NA> <spk> <NA> <NA>
"""

import logging
from collections import OrderedDict
from typing import Dict

from models.timeline import Timeline
from utils.errors import ParseError

logger = logging.getLogger(__name__)


def parse_rttm_files(text: str) -> "OrderedDict[str, Timeline]":
    """Timelines keyed by file id, in order of first appearance"""
    out: "OrderedDict[str, Timeline]" = OrderedDict()
    for line_no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if fields[0] != "SPEAKER":
            logger.debug("Skipping %s record on line %d", fields[0], line_no)
            continue
        if len(fields) < 8:
            raise ParseError(f"expected at least 8 fields, got {len(fields)}", line_no)
        try:
            tbeg = float(fields[3])
            tdur = float(fields[4])
        except ValueError:
            raise ParseError(f"non-numeric time fields {fields[3]!r} {fields[4]!r}", line_no)
        if tbeg < 0 or tdur < 0:
            raise ParseError(f"negative onset or duration ({tbeg}, {tdur})", line_no)
        if tdur == 0:
            logger.debug("Skipping zero-length turn on line %d", line_no)
            continue
        out.setdefault(fields[1], Timeline()).add(fields[7], tbeg, tbeg + tdur)
    return out


def parse_rttm(text: str) -> Timeline:
    """All SPEAKER turns of a document, regardless of file id"""
    timeline = Timeline()
    for tl in parse_rttm_files(text).values():
        timeline.turns.extend(tl.turns)
    return timeline


def emit_rttm(timeline: Timeline, file_id: str) -> str:
    lines = []
    for turn in sorted(timeline.turns, key=lambda t: (t.start, t.speaker)):
        lines.append(f"SPEAKER {file_id} 1 {turn.start:.3f} {turn.duration:.3f} <NA> <NA> {turn.speaker} <NA> <NA>")
    return "".join(line + "\n" for line in lines)


def read_rttm(path: str) -> Dict[str, Timeline]:
    with open(path, "r", encoding="utf-8") as f:
        return parse_rttm_files(f.read())


def write_rttm(path: str, timeline: Timeline, file_id: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(emit_rttm(timeline, file_id))
