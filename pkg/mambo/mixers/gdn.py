"""
Gated DeltaNet Mixer - gated delta rule

q, k: per-head projections, L2-normalized (no convolution)
v: projection -> causal conv (width conv_width) -> SiLU
log alpha_t = -exp(A_log) * sigmoid(g_t), beta_t = sigmoid(b_t)
y -> per-head RMSNorm gated by SiLU(z) -> out_proj
"""

import torch
from torch import nn
import torch.nn.functional as F
from einops import rearrange

from ..norm import GatedRMSNorm
from ..util.checks import as_batch, check_finite
from .config import MixerKind, StepCoefficients
from .conv import CausalDepthwiseConv1d
from .scan import mixer_core

L2_EPS = 1e-6


class GatedDeltaNetMixer(nn.Module):
    """
    Delta-rule linear attention with a multiplicative decay gate.

    Args:
        cfg: MixerConfig with kind GDN
    """

    kind = MixerKind.GDN

    def __init__(self, cfg):
        super().__init__()
        self.cfg = cfg = cfg.validate()
        inner, heads, state = cfg.inner_dim, cfg.n_heads, cfg.state_dim

        self.q_proj = nn.Linear(cfg.model_dim, heads * state, bias=False)
        self.k_proj = nn.Linear(cfg.model_dim, heads * state, bias=False)
        self.v_proj = nn.Linear(cfg.model_dim, inner, bias=False)
        self.v_conv = CausalDepthwiseConv1d(inner, cfg.conv_width)
        self.a_proj = nn.Linear(cfg.model_dim, heads, bias=False)
        self.b_proj = nn.Linear(cfg.model_dim, heads, bias=False)
        self.A_log = nn.Parameter(torch.zeros(heads))
        self.z_proj = nn.Linear(cfg.model_dim, inner, bias=False)
        self.norm = GatedRMSNorm(cfg.head_dim, norm_before_gate=True)
        self.out_proj = nn.Linear(inner, cfg.model_dim, bias=False)

    def coefficients(self, x):
        """
        Project x (B, T, D) to step coefficients and the gate branch.

        Returns:
            tuple: (StepCoefficients, gate (B, T, H, P))
        """
        cfg = self.cfg
        q = rearrange(self.q_proj(x), 'b t (h n) -> b t h n', n=cfg.state_dim)
        k = rearrange(self.k_proj(x), 'b t (h n) -> b t h n', n=cfg.state_dim)
        value = F.silu(self.v_conv(self.v_proj(x)))
        coeffs = StepCoefficients(
            kind=MixerKind.GDN,
            value=rearrange(value, 'b t (h p) -> b t h p', p=cfg.head_dim),
            log_decay=-torch.exp(self.A_log) * torch.sigmoid(self.a_proj(x)),
            beta=torch.sigmoid(self.b_proj(x)),
            key=F.normalize(k, p=2, dim=-1, eps=L2_EPS),
            query=F.normalize(q, p=2, dim=-1, eps=L2_EPS),
        )
        z = rearrange(self.z_proj(x), 'b t (h p) -> b t h p', p=cfg.head_dim)
        return coeffs, z

    def forward(self, x):
        x, added = as_batch(x, self.cfg.model_dim, "mixer input")
        check_finite(x, "mixer input")
        coeffs, z = self.coefficients(x)
        y = rearrange(self.norm(mixer_core(coeffs), z), 'b t h p -> b t (h p)')
        out = self.out_proj(y)
        return out[0] if added else out
