"""
Multi-Head Attention - non-causal, no positional signal
"""

import math

import torch
from torch import nn
from einops import rearrange

from ..errors import ConfigError
from ..util.checks import as_batch, check_finite


class MultiHeadAttention(nn.Module):
    """
    Softmax attention over all frames of an utterance.

    Args:
        model_dim: D, channels in and out
        n_heads: number of heads; must divide D
    """

    def __init__(self, model_dim, n_heads):
        super().__init__()
        if n_heads < 1 or model_dim % n_heads != 0:
            raise ConfigError(f"model_dim {model_dim} is not divisible by n_heads {n_heads}")
        self.model_dim = model_dim
        self.n_heads = n_heads
        self.scale = 1.0 / math.sqrt(model_dim // n_heads)
        self.q_proj = nn.Linear(model_dim, model_dim, bias=False)
        self.k_proj = nn.Linear(model_dim, model_dim, bias=False)
        self.v_proj = nn.Linear(model_dim, model_dim, bias=False)
        self.out_proj = nn.Linear(model_dim, model_dim, bias=False)

    def attention_weights(self, x):
        """Softmax weights (B, H, T, T) for a batch x (B, T, D)"""
        q = rearrange(self.q_proj(x), 'b t (h d) -> b h t d', h=self.n_heads)
        k = rearrange(self.k_proj(x), 'b t (h d) -> b h t d', h=self.n_heads)
        return torch.softmax(torch.einsum('bhtd,bhsd->bhts', q, k) * self.scale, dim=-1)

    def forward(self, x):
        x, added = as_batch(x, self.model_dim, "attention input")
        check_finite(x, "attention input")
        v = rearrange(self.v_proj(x), 'b t (h d) -> b h t d', h=self.n_heads)
        y = torch.einsum('bhts,bhsd->bhtd', self.attention_weights(x), v)
        out = self.out_proj(rearrange(y, 'b h t d -> b t (h d)'))
        return out[0] if added else out
