"""
Loss and gradients for one batch, plus a finite-difference check.
"""

import logging

import torch

from ..errors import NonFiniteError, ShapeError
from .loss import focal_loss

logger = logging.getLogger(__name__)


def batch_loss(model, batch, cfg):
    """
    Mean focal loss of a batch.

    Args:
        model: MamboBackbone
        batch: (features (B, T, F), labels (B,))
        cfg: TrainConfig

    Returns:
        Tensor: scalar loss
    """
    x, labels = batch
    if x.shape[0] == 0:
        raise ShapeError("empty batch")
    out = model(x)
    return focal_loss(out.logits, labels, cfg.focal_gamma, cfg.focal_alpha)


def loss_and_grads(model, batch, cfg):
    """
    Loss and the gradient of every trainable parameter.

    Returns:
        tuple: (loss float, dict name -> gradient tensor)
    """
    model.train()
    named = [(n, p) for n, p in model.named_parameters() if p.requires_grad]
    loss = batch_loss(model, batch, cfg)
    if not bool(torch.isfinite(loss)):
        raise NonFiniteError(f"loss is {loss.item()}")
    grads = torch.autograd.grad(loss, [p for _, p in named], allow_unused=True)
    out = {}
    for (name, p), g in zip(named, grads):
        out[name] = torch.zeros_like(p) if g is None else g
    return loss.item(), out


def check_gradients(model, batch, cfg, h=1e-4, n_dirs=1, seed=0):
    """
    Compare analytic gradients with central finite differences.

    Each parameter tensor is checked along n_dirs random unit directions u:
    <grad, u> against (L(p + h u) - L(p - h u)) / 2h. Run the model in float64.

    Returns:
        list: (name, analytic, numeric) per direction
    """
    _, grads = loss_and_grads(model, batch, cfg)
    gen = torch.Generator().manual_seed(seed)
    checks = []
    with torch.no_grad():
        for name, p in model.named_parameters():
            if not p.requires_grad:
                continue
            for _ in range(n_dirs):
                u = torch.randn(p.shape, generator=gen, dtype=torch.float64).to(p.dtype)
                u /= u.norm()
                analytic = float((grads[name] * u).sum())
                p.add_(h * u)
                plus = float(batch_loss(model, batch, cfg))
                p.sub_(2 * h * u)
                minus = float(batch_loss(model, batch, cfg))
                p.add_(h * u)
                checks.append((name, analytic, (plus - minus) / (2 * h)))
    logger.debug("gradient check directions=%d", len(checks))
    return checks
