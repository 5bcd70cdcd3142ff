"""
Focal loss over the two-logit head.
"""

import torch
import torch.nn.functional as F

from ..errors import ConfigError, NonFiniteError
from ..util.checks import check_finite


def focal_loss(logits, labels, gamma, alpha):
    """
    Mean focal loss.

    loss_i = -alpha[y_i] * (1 - p_i)^gamma * log p_i, p_i the softmax
    probability of the true class, computed from log_softmax.

    Args:
        logits: (B, 2) or (2,)
        labels: (B,) or scalar, 0 bonafide / 1 spoof
        gamma: focusing exponent >= 0
        alpha: per-class weights in (0, 1], indexed by label

    Returns:
        Tensor: scalar loss
    """
    if gamma < 0:
        raise ConfigError(f"focal gamma must be >= 0, got {gamma}")
    alpha = torch.as_tensor(alpha, dtype=logits.dtype, device=logits.device)
    if alpha.numel() != 2 or not bool(((alpha > 0) & (alpha <= 1)).all()):
        raise ConfigError(f"focal alpha must be two weights in (0, 1], got {alpha.tolist()}")
    check_finite(logits, "logits")

    logits = logits.reshape(-1, 2)
    labels = torch.as_tensor(labels, device=logits.device).reshape(-1).long()
    if labels.numel() != logits.shape[0]:
        raise ConfigError(f"{labels.numel()} labels for {logits.shape[0]} logit pairs")

    log_p = F.log_softmax(logits, dim=-1).gather(1, labels[:, None]).squeeze(1)
    p = log_p.exp()
    loss = -(alpha[labels] * (1.0 - p) ** gamma * log_p).mean()
    if not bool(torch.isfinite(loss)):
        raise NonFiniteError("focal loss is not finite")
    return loss
