"""
Mamba2 Mixer - scalar-decay headed scan

x -> in_proj -> (gate z, xBC, dt)
xBC -> causal conv -> SiLU -> (value, key, query) with key/query shared by all heads
log decay log a_t = -softplus(dt + dt_bias) * exp(A_log) per head, kept in log space
y -> GatedRMSNorm(y, z) -> out_proj
"""

import torch
from torch import nn
import torch.nn.functional as F
from einops import rearrange, repeat

from ..norm import GatedRMSNorm
from ..util.checks import as_batch, check_finite
from .config import MixerKind, StepCoefficients
from .conv import CausalDepthwiseConv1d
from .mamba import dt_bias_init
from .scan import mixer_core

A_INIT_RANGE = (1.0, 16.0)


class Mamba2Mixer(nn.Module):
    """
    Structured state space mixer with one scalar decay per head.

    Args:
        cfg: MixerConfig with kind MAMBA2
    """

    kind = MixerKind.MAMBA2
    bidirectional = False
    # per-head scalars projected next to z and xBC: dt
    tail_per_head = 1

    def __init__(self, cfg):
        super().__init__()
        self.cfg = cfg = cfg.validate()
        inner, state, heads = cfg.inner_dim, cfg.state_dim, cfg.n_heads
        self.conv_dim = inner + 2 * state

        self.in_proj = nn.Linear(cfg.model_dim, inner + self.conv_dim + self.tail_per_head * heads,
                                 bias=False)
        self.conv = CausalDepthwiseConv1d(self.conv_dim, cfg.conv_width,
                                          bidirectional=self.bidirectional)
        self.dt_bias = nn.Parameter(dt_bias_init(heads))
        lo, hi = A_INIT_RANGE
        self.A_log = nn.Parameter(torch.log(torch.empty(heads).uniform_(lo, hi)))
        self.D = nn.Parameter(torch.ones(heads))
        self.norm = GatedRMSNorm(inner, norm_before_gate=False)
        self.out_proj = nn.Linear(inner, cfg.model_dim, bias=False)

    def _split(self, x):
        cfg = self.cfg
        z, xbc, rest = torch.split(
            self.in_proj(x), [cfg.inner_dim, self.conv_dim, self.tail_per_head * cfg.n_heads], dim=-1)
        xbc = F.silu(self.conv(xbc))
        value, k, q = torch.split(xbc, [cfg.inner_dim, cfg.state_dim, cfg.state_dim], dim=-1)
        heads = cfg.n_heads
        value = rearrange(value, 'b t (h p) -> b t h p', p=cfg.head_dim)
        key = repeat(k, 'b t n -> b t h n', h=heads)
        query = repeat(q, 'b t n -> b t h n', h=heads)
        return z, value, key, query, rest

    def _log_decay(self, dt):
        return -F.softplus(dt + self.dt_bias) * torch.exp(self.A_log)

    def coefficients(self, x):
        """
        Project x (B, T, D) to step coefficients and the gate branch.

        Returns:
            tuple: (StepCoefficients, gate (B, T, inner))
        """
        z, value, key, query, dt = self._split(x)
        coeffs = StepCoefficients(
            kind=MixerKind.MAMBA2, value=value, log_decay=self._log_decay(dt),
            key=key, query=query, skip=self.D)
        return coeffs, z

    def forward(self, x):
        x, added = as_batch(x, self.cfg.model_dim, "mixer input")
        check_finite(x, "mixer input")
        coeffs, z = self.coefficients(x)
        y = rearrange(mixer_core(coeffs), 'b t h p -> b t (h p)')
        out = self.out_proj(self.norm(y, z))
        return out[0] if added else out
