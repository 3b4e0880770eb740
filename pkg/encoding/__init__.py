"""
Power-set encoding of overlapped speaker activity
"""

from .pse_codec import (
    PseConfig,
    encode_pse,
    decode_pse,
    num_classes,
    pse_to_class,
    class_to_pse,
    encode_sequence,
    decode_sequence,
    activity_table,
)

__all__ = [
    'PseConfig',
    'encode_pse',
    'decode_pse',
    'num_classes',
    'pse_to_class',
    'class_to_pse',
    'encode_sequence',
    'decode_sequence',
    'activity_table',
]
