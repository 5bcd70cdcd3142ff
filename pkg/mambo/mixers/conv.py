"""
Depthwise short convolution over time.
"""

import torch
from torch import nn
import torch.nn.functional as F


class CausalDepthwiseConv1d(nn.Module):
    """
    Per-channel convolution that only looks at the current and past frames.

    With bidirectional=True the same kernel is also run over the reversed
    sequence and the two outputs are averaged, which keeps the layer
    equivariant to time reversal.

    Args:
        channels: number of channels (one kernel each)
        width: kernel length
        bidirectional: average causal and anti-causal passes
    """

    def __init__(self, channels, width, bidirectional=False):
        super().__init__()
        self.width = width
        self.bidirectional = bidirectional
        self.weight = nn.Parameter(torch.empty(channels, 1, width))
        self.bias = nn.Parameter(torch.zeros(channels))
        bound = 1.0 / width ** 0.5
        nn.init.uniform_(self.weight, -bound, bound)

    def _causal(self, x):
        # x: (B, T, C) -> left-pad width-1 frames
        length = x.shape[1]
        out = F.conv1d(x.transpose(1, 2), self.weight, self.bias,
                       padding=self.width - 1, groups=x.shape[-1])
        return out[:, :, :length].transpose(1, 2)

    def forward(self, x):
        y = self._causal(x)
        if self.bidirectional:
            y = 0.5 * (y + torch.flip(self._causal(torch.flip(x, dims=[1])), dims=[1]))
        return y
