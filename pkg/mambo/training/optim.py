"""
AdamW with decoupled weight decay and explicit state.

  m <- b1 m + (1 - b1) g
  v <- b2 v + (1 - b2) g^2
  theta <- theta - lr * (m_hat / (sqrt(v_hat) + eps) + wd * theta)

Decay is skipped for 1-d tensors (biases, norm gains, skips) and for the
SSM log-decay and step-bias parameters.
"""

from dataclasses import dataclass, field

import torch

from ..errors import ConfigError, NonFiniteError, ShapeError

NO_DECAY_SUFFIXES = ('A_log', 'dt_bias', '.D')


def decays(name, param):
    """Whether weight decay applies to a named parameter"""
    if param.ndim <= 1 or 'bias' in name or 'norm' in name.lower():
        return False
    return not name.endswith(NO_DECAY_SUFFIXES)


@dataclass
class OptimizerState:
    """First and second moments per parameter name, plus the step count"""
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)
    step: int = 0


def adamw_step(params, grads, state, lr, cfg, decay=None):
    """
    One AdamW update, in place.

    Args:
        params: dict name -> tensor
        grads: dict name -> gradient tensor (same shapes)
        state: OptimizerState, updated in place
        lr: learning rate for this step, >= 0
        cfg: TrainConfig (beta1, beta2, eps, weight_decay)
        decay: optional set of names that receive weight decay; default all

    Returns:
        tuple: (params, state)
    """
    if lr < 0:
        raise ConfigError(f"learning rate must be >= 0, got {lr}")
    for name, p in params.items():
        g = grads.get(name)
        if g is None or g.shape != p.shape:
            raise ShapeError(f"gradient for {name} missing or shaped "
                             f"{None if g is None else tuple(g.shape)}, expected {tuple(p.shape)}")
        if not bool(torch.isfinite(g).all()):
            raise NonFiniteError(f"non-finite gradient for {name}, step rejected")

    state.step += 1
    b1, b2 = cfg.beta1, cfg.beta2
    correction1 = 1.0 - b1 ** state.step
    correction2 = 1.0 - b2 ** state.step
    with torch.no_grad():
        for name, p in params.items():
            g = grads[name]
            if name not in state.m:
                state.m[name] = torch.zeros_like(p)
                state.v[name] = torch.zeros_like(p)
            m, v = state.m[name], state.v[name]
            m.mul_(b1).add_(g, alpha=1.0 - b1)
            v.mul_(b2).addcmul_(g, g, value=1.0 - b2)
            update = (m / correction1) / ((v / correction2).sqrt() + cfg.eps)
            wd = cfg.weight_decay if decay is None or name in decay else 0.0
            if wd:
                update = update + wd * p
            p.sub_(lr * update)
    return params, state


class AdamW:
    """
    AdamW over the trainable parameters of a module.

    Args:
        model: nn.Module
        cfg: TrainConfig
    """

    def __init__(self, model, cfg):
        self.cfg = cfg
        self.params = {n: p for n, p in model.named_parameters() if p.requires_grad}
        self.decay = {n for n, p in self.params.items() if decays(n, p)}
        self.state = OptimizerState()

    def step(self, grads, lr):
        adamw_step(self.params, grads, self.state, lr, self.cfg, self.decay)
