"""
Mamba Mixer - per-channel selective SSM

x -> in_proj -> (value, gate)
value -> causal depthwise conv -> SiLU -> step coefficients -> selective scan
y * SiLU(gate) -> out_proj
"""

import math

import torch
from torch import nn
import torch.nn.functional as F

from ..util.checks import as_batch, check_finite
from .config import MixerKind, StepCoefficients
from .conv import CausalDepthwiseConv1d
from .scan import mixer_core

DT_MIN = 0.001
DT_MAX = 0.1


def inverse_softplus(x):
    """y with softplus(y) = x, in the stable form x + log(-expm1(-x))"""
    return x + torch.log(-torch.expm1(-x))


def dt_bias_init(size, dt_min=DT_MIN, dt_max=DT_MAX):
    """Bias whose softplus is log-uniform in [dt_min, dt_max]"""
    dt = torch.exp(torch.rand(size) * (math.log(dt_max) - math.log(dt_min)) + math.log(dt_min))
    return inverse_softplus(dt)


class MambaMixer(nn.Module):
    """
    Selective scan mixer with a diagonal A per channel.

    Args:
        cfg: MixerConfig with kind MAMBA
    """

    def __init__(self, cfg):
        super().__init__()
        self.cfg = cfg = cfg.validate()
        inner, state, rank = cfg.inner_dim, cfg.state_dim, cfg.dt_rank

        self.in_proj = nn.Linear(cfg.model_dim, 2 * inner, bias=False)
        self.conv = CausalDepthwiseConv1d(inner, cfg.conv_width)
        self.x_proj = nn.Linear(inner, rank + 2 * state, bias=False)
        self.dt_proj = nn.Linear(rank, inner, bias=True)
        with torch.no_grad():
            self.dt_proj.bias.copy_(dt_bias_init(inner))

        # A = -exp(A_log) = -(1..S) per channel
        a = torch.arange(1, state + 1, dtype=torch.float32).repeat(inner, 1)
        self.A_log = nn.Parameter(torch.log(a))
        self.D = nn.Parameter(torch.ones(inner))
        self.out_proj = nn.Linear(inner, cfg.model_dim, bias=False)

    def coefficients(self, x):
        """
        Project x (B, T, D) to step coefficients and the gate branch.

        Returns:
            tuple: (StepCoefficients, gate (B, T, inner))
        """
        rank, state = self.cfg.dt_rank, self.cfg.state_dim
        value, gate = self.in_proj(x).chunk(2, dim=-1)
        value = F.silu(self.conv(value))
        dt, b, c = torch.split(self.x_proj(value), [rank, state, state], dim=-1)
        coeffs = StepCoefficients(
            kind=MixerKind.MAMBA,
            value=value,
            # softplus underflows to 0 for very negative inputs
            delta=F.softplus(self.dt_proj(dt)).clamp_min(torch.finfo(value.dtype).tiny),
            A=-torch.exp(self.A_log),
            B=b,
            C=c,
            skip=self.D,
        )
        return coeffs, gate

    def forward(self, x):
        x, added = as_batch(x, self.cfg.model_dim, "mixer input")
        check_finite(x, "mixer input")
        coeffs, gate = self.coefficients(x)
        y = mixer_core(coeffs)
        out = self.out_proj(y * F.silu(gate))
        return out[0] if added else out
