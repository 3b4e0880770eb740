"""
    Data models shared by the diarization pipeline
    """

from .activity import ActivityMatrix, PSELabelSeq
from .profiles import ProfileSet
from .timeline import Turn, Timeline, activity_to_timeline, timeline_to_activity
from .der_result import DerResult
from .sim_sample import SimSample

__all__ = ['ActivityMatrix', 'PSELabelSeq', 'ProfileSet', 'Turn', 'Timeline',
           'activity_to_timeline', 'timeline_to_activity', 'DerResult', 'SimSample']
