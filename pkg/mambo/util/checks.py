"""
Input checks used at module boundaries.
"""

import torch

from ..errors import NonFiniteError, ShapeError


def check_finite(x, what):
    """Raise NonFiniteError if x holds NaN or infinity"""
    if not bool(torch.isfinite(x).all()):
        raise NonFiniteError(f"{what} contains non-finite values")


def as_batch(x, channels=None, what="input"):
    """
    Accept a single sequence (T, C) or a batch (B, T, C).

    Args:
        x: tensor of rank 2 or 3
        channels: expected trailing size, or None to skip the check
        what: name used in diagnostics

    Returns:
        tuple: (batched tensor, True if a batch axis was added)
    """
    if x.dim() == 2:
        x, added = x.unsqueeze(0), True
    elif x.dim() == 3:
        added = False
    else:
        raise ShapeError(f"{what} must be (T, C) or (B, T, C), got shape {tuple(x.shape)}")
    if x.shape[1] < 1:
        raise ShapeError(f"{what} has no frames")
    if channels is not None and x.shape[-1] != channels:
        raise ShapeError(f"{what} has {x.shape[-1]} channels, expected {channels}")
    return x, added
