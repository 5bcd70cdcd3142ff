"""
Hydra Mixer - quasiseparable bidirectional mixer

Same projections as Mamba2, with two changes that make the layer symmetric
in time:
- the short convolution runs in both directions with one shared kernel
- the mixer matrix has a strictly-lower and a strictly-upper semiseparable
  part sharing one coefficient set, plus a per-step diagonal
  diag_t = diag_proj(x_t) + D[h]
"""

import torch

from .config import MixerKind, StepCoefficients
from .mamba2 import Mamba2Mixer


class HydraMixer(Mamba2Mixer):
    """
    Bidirectional quasiseparable mixer.

    Args:
        cfg: MixerConfig with kind HYDRA
    """

    kind = MixerKind.HYDRA
    bidirectional = True
    # dt and the per-step diagonal
    tail_per_head = 2

    def coefficients(self, x):
        """
        Project x (B, T, D) to HYDRA step coefficients and the gate branch.

        Returns:
            tuple: (StepCoefficients, gate (B, T, inner))
        """
        z, value, key, query, rest = self._split(x)
        dt, diag = torch.chunk(rest, 2, dim=-1)
        coeffs = StepCoefficients(
            kind=MixerKind.HYDRA, value=value, log_decay=self._log_decay(dt),
            key=key, query=query, diag=diag + self.D)
        return coeffs, z
