"""
Backbone - MamBo topologies, embedding, pooling and head

Assembles mixers into the four layer arrangements (MAMBO1..MAMBO4) with
N-stacked SSM units, and carries the checkpoint format.
"""

from ..norm import rmsnorm, RMSNorm
from .config import Topology, LayerKind, BackboneConfig, layer_spec
from .ffn import SwiGLU, swiglu_ffn
from .layers import SSMStack, MamboLayer, apply_layer, zero_branch_projections
from .pooling import (
    BONAFIDE, SPOOF, PooledEmbedding, LogitsPair, GatedAttentionPool, gated_attention_pool,
    ClassifierHead, classify_and_score,
)
from .model import (
    FeatureEmbedding, MamboBackbone, embed_features, score_features, assemble_backbone,
    count_parameters,
)
from .checkpoint import Checkpoint, save_checkpoint, load_checkpoint

__all__ = [
    'rmsnorm', 'RMSNorm', 'Topology', 'LayerKind', 'BackboneConfig', 'layer_spec',
    'SwiGLU', 'swiglu_ffn', 'SSMStack', 'MamboLayer', 'apply_layer', 'zero_branch_projections',
    'BONAFIDE', 'SPOOF', 'PooledEmbedding', 'LogitsPair', 'GatedAttentionPool',
    'gated_attention_pool', 'ClassifierHead', 'classify_and_score',
    'FeatureEmbedding', 'MamboBackbone', 'embed_features', 'score_features',
    'assemble_backbone', 'count_parameters',
    'Checkpoint', 'save_checkpoint', 'load_checkpoint',
]
