"""
Utterance-level pooling and the binary head.

Gated attention pooling:
  a_t = v^T (tanh(W h_t) * sigmoid(G h_t)),  alpha = softmax(a),  pooled = sum_t alpha_t h_t

Head: logits = W pooled + b, index 0 bonafide, index 1 spoof;
score = logit_bonafide - logit_spoof (higher means more bonafide).
"""

from dataclasses import dataclass

import torch
from torch import nn

from ..util.checks import as_batch, check_finite

BONAFIDE = 0
SPOOF = 1
HEAD_INIT_RANGE = 0.01


@dataclass
class PooledEmbedding:
    """Pooled vectors (B, D) and the frame weights (B, T) that made them"""
    pooled: torch.Tensor
    weights: torch.Tensor


@dataclass
class LogitsPair:
    """Head output (B, 2) and the derived detection scores (B,)"""
    logits: torch.Tensor
    score: torch.Tensor


class GatedAttentionPool(nn.Module):
    """
    Softmax-weighted frame average with a gated scoring function.

    Args:
        dim: D
    """

    def __init__(self, dim):
        super().__init__()
        self.dim = dim
        self.W = nn.Linear(dim, dim, bias=False)
        self.G = nn.Linear(dim, dim, bias=False)
        self.v = nn.Linear(dim, 1, bias=False)

    def scores(self, h):
        return self.v(torch.tanh(self.W(h)) * torch.sigmoid(self.G(h))).squeeze(-1)

    def forward(self, h):
        a = self.scores(h)
        check_finite(a, "pooling scores")
        alpha = torch.softmax(a, dim=-1)
        return PooledEmbedding(pooled=torch.einsum('bt,btd->bd', alpha, h), weights=alpha)


def gated_attention_pool(h, pool):
    """
    Pool frames h (T, D) or (B, T, D) into one vector per utterance.

    Returns:
        PooledEmbedding: unbatched when h was (T, D)
    """
    h, added = as_batch(h, pool.dim, "pooling input")
    out = pool(h)
    if added:
        return PooledEmbedding(pooled=out.pooled[0], weights=out.weights[0])
    return out


class ClassifierHead(nn.Module):
    """Linear D -> 2 with a small uniform init"""

    def __init__(self, dim):
        super().__init__()
        self.proj = nn.Linear(dim, 2)
        nn.init.uniform_(self.proj.weight, -HEAD_INIT_RANGE, HEAD_INIT_RANGE)
        nn.init.uniform_(self.proj.bias, -HEAD_INIT_RANGE, HEAD_INIT_RANGE)

    def forward(self, pooled):
        return self.proj(pooled)


def classify_and_score(pooled, head):
    """
    Logits and detection score for pooled vectors (D,) or (B, D).

    Returns:
        LogitsPair
    """
    logits = head(pooled)
    check_finite(logits, "logits")
    return LogitsPair(logits=logits, score=logits[..., BONAFIDE] - logits[..., SPOOF])
