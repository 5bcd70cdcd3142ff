"""
Backbone configuration: topology, layer kinds and sizes.
"""

import logging
from dataclasses import dataclass, field, replace

from ..errors import ConfigError
from ..mixers.config import MixerConfig

logger = logging.getLogger(__name__)


class Topology:
    """MamBo layer arrangements"""
    MAMBO1 = 'MAMBO1'    # every layer Mamba (SSM stack + FFN)
    MAMBO2 = 'MAMBO2'    # every layer Mamer (SSM stack + MHA)
    MAMBO3 = 'MAMBO3'    # Mamba / Transformer alternation
    MAMBO4 = 'MAMBO4'    # Mamba / Mamer alternation

    ALL = (MAMBO1, MAMBO2, MAMBO3, MAMBO4)

    @staticmethod
    def parse(value):
        topology = str(value).strip().upper()
        if topology not in Topology.ALL:
            raise ConfigError(f"Unknown topology: {value!r} (expected one of {', '.join(Topology.ALL)})")
        return topology


class LayerKind:
    """Residual layer variants"""
    MAMBA_LAYER = 'MAMBA_LAYER'              # (SSM stack, SwiGLU FFN)
    MAMER_LAYER = 'MAMER_LAYER'              # (SSM stack, MHA)
    TRANSFORMER_LAYER = 'TRANSFORMER_LAYER'  # (MHA, SwiGLU FFN)

    ALL = (MAMBA_LAYER, MAMER_LAYER, TRANSFORMER_LAYER)

    # short names used in logs and the CLI
    SHORT = {MAMBA_LAYER: 'M', MAMER_LAYER: 'Me', TRANSFORMER_LAYER: 'T'}


def layer_spec(topology, L):
    """
    Layer kinds of a backbone, first to last.

    Alternating topologies start with a Mamba layer.

    Args:
        topology: Topology value
        L: number of layers

    Returns:
        list: L LayerKind values
    """
    topology = Topology.parse(topology)
    if L < 1:
        raise ConfigError(f"L must be >= 1, got {L}")
    if topology == Topology.MAMBO1:
        return [LayerKind.MAMBA_LAYER] * L
    if topology == Topology.MAMBO2:
        return [LayerKind.MAMER_LAYER] * L
    other = LayerKind.TRANSFORMER_LAYER if topology == Topology.MAMBO3 else LayerKind.MAMER_LAYER
    return [LayerKind.MAMBA_LAYER if i % 2 == 0 else other for i in range(L)]


@dataclass
class BackboneConfig:
    """
    Full architecture of a MamBo backbone.

    Args:
        topology: Topology value
        L: layer count
        N: SSM blocks stacked inside one residual unit
        D: hidden width
        input_dim: F, feature dims of the input frames
        mixer: MixerConfig; its model_dim follows D
        n_attn_heads: heads of every MHA sub-block
        ffn_mult: SwiGLU hidden width is ffn_mult * D
        norm_eps: RMSNorm stabilizer
        dropout: dropout on residual branches (0 disables)
    """
    topology: str = Topology.MAMBO1
    L: int = 5
    N: int = 1
    D: int = 128
    input_dim: int = 1024
    mixer: MixerConfig = field(default_factory=MixerConfig)
    n_attn_heads: int = 4
    ffn_mult: int = 4
    norm_eps: float = 1e-6
    dropout: float = 0.0

    def __post_init__(self):
        self.topology = Topology.parse(self.topology)

    def mixer_config(self):
        """Mixer config with model_dim tied to D"""
        return replace(self.mixer, model_dim=self.D)

    @property
    def layers(self):
        return layer_spec(self.topology, self.L)

    def validate(self):
        """Raise ConfigError unless every invariant holds"""
        if self.L < 1:
            raise ConfigError(f"L must be >= 1, got {self.L}")
        if self.N < 1:
            raise ConfigError(f"N must be >= 1, got {self.N}")
        if self.D < 1:
            raise ConfigError(f"D must be >= 1, got {self.D}")
        if self.input_dim < 1:
            raise ConfigError(f"input_dim must be >= 1, got {self.input_dim}")
        if self.n_attn_heads < 1 or self.D % self.n_attn_heads != 0:
            raise ConfigError(f"D={self.D} is not divisible by n_attn_heads={self.n_attn_heads}")
        if self.ffn_mult < 1:
            raise ConfigError(f"ffn_mult must be >= 1, got {self.ffn_mult}")
        if self.norm_eps <= 0:
            raise ConfigError(f"norm_eps must be > 0, got {self.norm_eps}")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError(f"dropout must lie in [0, 1), got {self.dropout}")
        if self.topology == Topology.MAMBO4 and self.N != 1:
            logger.warning("MAMBO4 is defined with N=1, building with N=%d", self.N)
        self.mixer_config().validate()
        return self
