"""
Linear warmup followed by cosine decay to zero, per optimizer step.
"""

import math

from ..errors import ConfigError


def warmup_steps(total_steps, warmup_frac):
    return int(round(warmup_frac * total_steps))


def lr_schedule(step, total_steps, cfg):
    """
    Learning rate at a step.

    Args:
        step: 0..total_steps
        total_steps: steps in the whole run
        cfg: TrainConfig (peak_lr, warmup_frac)

    Returns:
        float
    """
    if total_steps <= 0:
        raise ConfigError(f"total_steps must be >= 1, got {total_steps}")
    if not 0 <= step <= total_steps:
        raise ConfigError(f"step {step} outside [0, {total_steps}]")
    warm = warmup_steps(total_steps, cfg.warmup_frac)
    if warm > 0 and step <= warm:
        return cfg.peak_lr * step / warm
    if warm >= total_steps:
        return cfg.peak_lr
    progress = (step - warm) / (total_steps - warm)
    return cfg.peak_lr * 0.5 * (1.0 + math.cos(math.pi * progress))
