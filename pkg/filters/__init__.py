"""
Post-processing of segment posteriors: median smoothing and stitching
"""

from .smoothing import odd_window, smooth_activity, smooth
from .stitching import SegmentResult, StitchResult, average_posteriors, decide_activity, stitch

__all__ = [
    'odd_window',
    'smooth_activity',
    'smooth',
    'SegmentResult',
    'StitchResult',
    'average_posteriors',
    'decide_activity',
    'stitch',
]
