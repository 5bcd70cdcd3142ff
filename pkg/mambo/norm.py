"""
RMS normalization shared by the backbone and the mixers.
"""

import torch
from torch import nn
import torch.nn.functional as F

from .errors import ConfigError
from .util.checks import check_finite


def rmsnorm(x, gain, eps):
    """
    Frame-wise RMS normalization.

    Args:
        x: (..., C) tensor
        gain: (C,) per-channel gain
        eps: non-negative stabilizer added to the mean square

    Returns:
        Tensor: x / sqrt(mean(x^2) + eps) * gain, same shape as x
    """
    if eps < 0:
        raise ConfigError(f"eps must be >= 0, got {eps}")
    check_finite(x, "rmsnorm input")
    return x * torch.rsqrt(x.pow(2).mean(-1, keepdim=True) + eps) * gain


class RMSNorm(nn.Module):
    """RMSNorm with a learned gain"""

    def __init__(self, dim, eps=1e-6):
        super().__init__()
        self.eps = eps
        self.gain = nn.Parameter(torch.ones(dim))

    def forward(self, x):
        return rmsnorm(x, self.gain, self.eps)


class GatedRMSNorm(nn.Module):
    """
    RMSNorm combined with a SiLU gate.

    norm_before_gate=False normalizes y * silu(z); True gates the normalized y.
    """

    def __init__(self, dim, eps=1e-6, norm_before_gate=False):
        super().__init__()
        self.eps = eps
        self.norm_before_gate = norm_before_gate
        self.gain = nn.Parameter(torch.ones(dim))

    def forward(self, y, z):
        if self.norm_before_gate:
            return rmsnorm(y, self.gain, self.eps) * F.silu(z)
        return rmsnorm(y * F.silu(z), self.gain, self.eps)
