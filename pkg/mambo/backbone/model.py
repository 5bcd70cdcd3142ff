"""
MamBo Backbone - embedding, layers, pooling, head

features (T, F) -> RMSNorm(F) -> Linear F->D -> L MamBo layers -> gated attention pool -> Linear D->2
"""

import logging

import torch
from torch import nn

from ..errors import ShapeError
from ..norm import RMSNorm
from ..util.checks import as_batch, check_finite
from .config import BackboneConfig, LayerKind
from .layers import MamboLayer
from .pooling import ClassifierHead, GatedAttentionPool, classify_and_score

logger = logging.getLogger(__name__)


class FeatureEmbedding(nn.Module):
    """RMSNorm over F followed by a linear map F -> D (bias zero at init)"""

    def __init__(self, input_dim, dim, eps):
        super().__init__()
        self.input_dim = input_dim
        self.norm = RMSNorm(input_dim, eps)
        self.proj = nn.Linear(input_dim, dim)
        nn.init.zeros_(self.proj.bias)

    def forward(self, x):
        return self.proj(self.norm(x))


class MamboBackbone(nn.Module):
    """
    Complete detector for one BackboneConfig.

    Args:
        cfg: BackboneConfig
    """

    def __init__(self, cfg):
        super().__init__()
        self.cfg = cfg.validate()
        self.spec = cfg.layers
        self.embed = FeatureEmbedding(cfg.input_dim, cfg.D, cfg.norm_eps)
        self.layers = nn.ModuleList(MamboLayer(kind, cfg) for kind in self.spec)
        self.pool = GatedAttentionPool(cfg.D)
        self.head = ClassifierHead(cfg.D)

    def encode(self, h):
        """Run the L layers on embedded frames (B, T, D)"""
        for layer in self.layers:
            h = layer(h)
        return h

    def forward(self, x):
        """
        Args:
            x: features (B, T, F)

        Returns:
            LogitsPair: logits (B, 2) and scores (B,)
        """
        h = self.encode(self.embed(x))
        return classify_and_score(self.pool(h).pooled, self.head)


def _check_features(x, cfg):
    x, added = as_batch(x, None, "features")
    if x.shape[-1] != cfg.input_dim:
        raise ShapeError(f"features have F={x.shape[-1]}, model expects input_dim={cfg.input_dim}")
    check_finite(x, "features")
    return x, added


def embed_features(x, model):
    """
    Map features (T, F) or (B, T, F) to hidden frames (..., T, D).
    """
    x, added = _check_features(x, model.cfg)
    h = model.embed(x)
    return h[0] if added else h


def score_features(x, model):
    """
    Detection scores for features (T, F) or (B, T, F).

    Returns:
        LogitsPair: unbatched when x was (T, F)
    """
    x, added = _check_features(x, model.cfg)
    out = model(x)
    if added:
        return type(out)(logits=out.logits[0], score=out.score[0])
    return out


def assemble_backbone(cfg, seed=0):
    """
    Build a backbone with deterministic initialization.

    Args:
        cfg: BackboneConfig
        seed: integer seed for parameter init; the global RNG is left untouched

    Returns:
        tuple: (layer spec list, MamboBackbone)
    """
    cfg.validate()
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed)
        model = MamboBackbone(cfg)
    logger.debug("assembled %s layers=%s mixer=%s N=%d D=%d params=%d",
                 cfg.topology, '/'.join(LayerKind.SHORT[k] for k in model.spec),
                 cfg.mixer.kind, cfg.N, cfg.D, count_parameters(model))
    return list(model.spec), model


def count_parameters(target):
    """
    Trainable scalar count.

    Args:
        target: BackboneConfig or an nn.Module

    Returns:
        int
    """
    if isinstance(target, BackboneConfig):
        _, target = assemble_backbone(target)
    return sum(p.numel() for p in target.parameters() if p.requires_grad)
