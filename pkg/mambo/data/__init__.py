"""
Data - feature files, protocols, fixed-length shaping and synthetic splits
"""

from .features import MAGIC, encode_features, decode_features, write_features, read_features
from .protocol import Key, ProtocolEntry, parse_protocol, read_protocol, write_protocol, protocol_keys
from .shaping import DEFAULT_T_FIXED, crop_or_pad
from .dataset import parse_manifest, read_manifest, write_manifest, LabeledDataset, load_dataset
from .synth import SynthSpec, AttackSignature, attack_signatures, synth_generate, write_synth

__all__ = [
    'MAGIC', 'encode_features', 'decode_features', 'write_features', 'read_features',
    'Key', 'ProtocolEntry', 'parse_protocol', 'read_protocol', 'write_protocol', 'protocol_keys',
    'DEFAULT_T_FIXED', 'crop_or_pad',
    'parse_manifest', 'read_manifest', 'write_manifest', 'LabeledDataset', 'load_dataset',
    'SynthSpec', 'AttackSignature', 'attack_signatures', 'synth_generate', 'write_synth',
]
