"""
Conversation simulator producing training segments with known speaker activity
"""

from .config import TurnStats, SimConfig
from .labels import speaker_track, limit_speakers, simulate_labels
from .features import SpeakerModel, make_speaker_bank, synth_features
from .dataset import ConversationSimulator, simulate_dataset, write_corpus
from .recording import SimRecording, oracle_vad, simulate_recording

__all__ = [
    'TurnStats',
    'SimConfig',
    'speaker_track',
    'limit_speakers',
    'simulate_labels',
    'SpeakerModel',
    'make_speaker_bank',
    'synth_features',
    'ConversationSimulator',
    'simulate_dataset',
    'write_corpus',
    'SimRecording',
    'oracle_vad',
    'simulate_recording',
]
