"""
MamBo Layers - pre-norm residual units

Every layer is two residual sub-blocks:
  x <- x + Sub1(rmsnorm(x))
  x <- x + Sub2(rmsnorm(x))

  MAMBA_LAYER        (SSM stack, SwiGLU FFN)
  MAMER_LAYER        (SSM stack, MHA)
  TRANSFORMER_LAYER  (MHA, SwiGLU FFN)

The SSM stack is N mixers applied one after another inside a single
residual branch, with no norms between them.
"""

from torch import nn

from ..errors import ConfigError
from ..mixers import build_mixer, MultiHeadAttention
from ..norm import RMSNorm
from .config import LayerKind
from .ffn import SwiGLU


class SSMStack(nn.Module):
    """N mixers composed sequentially"""

    def __init__(self, mixer_cfg, N):
        super().__init__()
        self.blocks = nn.ModuleList(build_mixer(mixer_cfg) for _ in range(N))

    def forward(self, x):
        for block in self.blocks:
            x = block(x)
        return x


class MamboLayer(nn.Module):
    """
    One residual layer of a MamBo backbone.

    Args:
        kind: LayerKind value
        cfg: BackboneConfig (validated)
    """

    def __init__(self, kind, cfg):
        super().__init__()
        if kind not in LayerKind.ALL:
            raise ConfigError(f"Unknown layer kind: {kind!r}")
        self.kind = kind
        self.norm1 = RMSNorm(cfg.D, cfg.norm_eps)
        self.norm2 = RMSNorm(cfg.D, cfg.norm_eps)

        def ssm():
            return SSMStack(cfg.mixer_config(), cfg.N)

        def mha():
            return MultiHeadAttention(cfg.D, cfg.n_attn_heads)

        def ffn():
            return SwiGLU(cfg.D, cfg.ffn_mult * cfg.D)

        first, second = {
            LayerKind.MAMBA_LAYER: (ssm, ffn),
            LayerKind.MAMER_LAYER: (ssm, mha),
            LayerKind.TRANSFORMER_LAYER: (mha, ffn),
        }[kind]
        self.sub1 = first()
        self.sub2 = second()
        self.drop = nn.Dropout(cfg.dropout)

    def forward(self, x):
        x = x + self.drop(self.sub1(self.norm1(x)))
        return x + self.drop(self.sub2(self.norm2(x)))


def apply_layer(kind, x, layer):
    """
    Run one MamBo layer on frames x (T, D) or (B, T, D).

    Args:
        kind: LayerKind the layer was built as
        x: input frames
        layer: MamboLayer

    Returns:
        Tensor: same shape as x
    """
    if kind != layer.kind:
        raise ConfigError(f"layer was built as {layer.kind}, applied as {kind}")
    if x.dim() == 2:
        return layer(x.unsqueeze(0))[0]
    return layer(x)


def zero_branch_projections(module):
    """
    Zero the last projection of every residual branch below module.

    With all branches zeroed each layer is the identity map.
    """
    for sub in module.modules():
        if isinstance(sub, SwiGLU):
            nn.init.zeros_(sub.w2.weight)
        elif hasattr(sub, 'out_proj') and isinstance(sub.out_proj, nn.Linear):
            nn.init.zeros_(sub.out_proj.weight)
    return module
