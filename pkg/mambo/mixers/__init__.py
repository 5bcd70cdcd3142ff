"""
Mixers - sequence mixing cores of every MamBo layer

Four state space mixers (MAMBA, MAMBA2, HYDRA, GDN) share one contract:
coefficients(x) produces StepCoefficients, the core maps the value stream,
forward(x) returns a tensor shaped like x. Each core has a sequential scan and
a materialized matrix form for checking.
"""

from .config import MixerKind, MixerConfig, StepCoefficients, validate_coefficients
from .scan import (
    selective_scan_ref, ssd_scan_ref, quasiseparable_scan_ref, delta_rule_scan_ref,
    run_scan, mixer_core, segsum, materialize_mixer_matrix, apply_mixer_matrix,
)
from .conv import CausalDepthwiseConv1d
from .mamba import MambaMixer
from .mamba2 import Mamba2Mixer
from .hydra import HydraMixer
from .gdn import GatedDeltaNetMixer
from .attention import MultiHeadAttention

MIXERS = {
    MixerKind.MAMBA: MambaMixer,
    MixerKind.MAMBA2: Mamba2Mixer,
    MixerKind.HYDRA: HydraMixer,
    MixerKind.GDN: GatedDeltaNetMixer,
}


def build_mixer(cfg):
    """Instantiate the mixer module for cfg.kind"""
    return MIXERS[MixerKind.parse(cfg.kind)](cfg)


__all__ = [
    'MixerKind', 'MixerConfig', 'StepCoefficients', 'validate_coefficients',
    'selective_scan_ref', 'ssd_scan_ref', 'quasiseparable_scan_ref', 'delta_rule_scan_ref',
    'run_scan', 'mixer_core', 'segsum', 'materialize_mixer_matrix', 'apply_mixer_matrix',
    'CausalDepthwiseConv1d', 'MambaMixer', 'Mamba2Mixer', 'HydraMixer',
    'GatedDeltaNetMixer', 'MultiHeadAttention', 'MIXERS', 'build_mixer',
]
