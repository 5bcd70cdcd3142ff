"""
SwiGLU feed-forward block.
"""

from torch import nn
import torch.nn.functional as F

from ..errors import ConfigError, ShapeError


class SwiGLU(nn.Module):
    """
    out = w2(swish(w1 x) * w3 x), no biases.

    Args:
        dim: channels in and out
        hidden_dim: width of the gate and value branches
    """

    def __init__(self, dim, hidden_dim):
        super().__init__()
        if dim < 1 or hidden_dim < 1:
            raise ConfigError(f"SwiGLU needs positive widths, got dim={dim} hidden_dim={hidden_dim}")
        self.w1 = nn.Linear(dim, hidden_dim, bias=False)
        self.w2 = nn.Linear(hidden_dim, dim, bias=False)
        self.w3 = nn.Linear(dim, hidden_dim, bias=False)

    def forward(self, x):
        return self.w2(F.silu(self.w1(x)) * self.w3(x))


def swiglu_ffn(x, ffn):
    """Apply a SwiGLU block to frames x (..., D)"""
    if x.shape[-1] != ffn.w1.in_features:
        raise ShapeError(f"SwiGLU expects {ffn.w1.in_features} channels, got {x.shape[-1]}")
    return ffn(x)
