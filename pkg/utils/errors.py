"""
Exception taxonomy shared by every stage of the diarization toolkit.

Value problems (bad shapes, bad configs, malformed files) derive from
ValueError; failures that happen while computing (divergence, solver
trouble) derive from RuntimeError.
"""

from typing import Any, Optional


class SondError(Exception):
    """Base class for all toolkit errors"""


class ConfigError(SondError, ValueError):
    pass


class ShapeError(SondError, ValueError):
    def __init__(self, message: str, *shapes: Any):
        if shapes:
            message = f"{message}: " + " vs ".join(str(tuple(s)) for s in shapes)
        super().__init__(message)
        self.shapes = shapes


class OutOfRangeError(SondError, ValueError):
    pass


class OverlapExceededError(SondError, ValueError):
    def __init__(self, active: int, max_overlap: int, frame: Optional[int] = None):
        where = f" at frame {frame}" if frame is not None else ""
        super().__init__(f"{active} active speakers{where} exceeds K={max_overlap}")
        self.active = active
        self.max_overlap = max_overlap
        self.frame = frame


class ParseError(SondError, ValueError):
    def __init__(self, message: str, line_no: Optional[int] = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class DegenerateEmbeddingError(SondError, ValueError):
    def __init__(self, index: int):
        super().__init__(f"embedding of chunk {index} has zero norm")
        self.index = index


class TooManySpeakersError(SondError, ValueError):
    pass


class UndefinedDERError(SondError, ValueError):
    pass


class CheckpointError(SondError, ValueError):
    pass


class NumericError(SondError, RuntimeError):
    pass


class GradCheckError(SondError, RuntimeError):
    def __init__(self, message: str, index: Optional[int] = None, name: Optional[str] = None):
        super().__init__(message)
        # flat index into the tensor called name
        self.index = index
        self.name = name


class ClusteringError(SondError, RuntimeError):
    pass


class SimulationError(SondError, RuntimeError):
    pass


class TrainingDivergedError(SondError, RuntimeError):
    def __init__(self, step: int, loss: float, last_good: Any = None):
        super().__init__(f"training diverged at step {step} (loss={loss})")
        self.step = step
        self.loss = loss
        self.last_good = last_good
