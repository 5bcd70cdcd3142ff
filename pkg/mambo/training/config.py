"""
Training hyperparameters.
"""

from dataclasses import dataclass
from typing import Optional

from ..errors import ConfigError


@dataclass
class TrainConfig:
    """
    Recipe for one training run.

    Args:
        peak_lr: learning rate at the end of warmup
        beta1, beta2, eps: AdamW moment coefficients and stabilizer
        weight_decay: decoupled decay (skipped for biases, gains, SSM scalars)
        warmup_frac: share of all steps spent in linear warmup
        max_epochs: hard epoch limit
        patience: epochs without dev-loss improvement before stopping
        batch_size: utterances per step
        focal_gamma: focusing exponent
        focal_alpha_bonafide, focal_alpha_spoof: per-class focal weights
        topk: checkpoints retained on disk
        seed: controls init, shuffling, crops and noise
        noise_snr_db: lower SNR bound of additive noise on train batches, None for off
    """
    peak_lr: float = 1e-5
    beta1: float = 0.9
    beta2: float = 0.95
    eps: float = 1e-8
    weight_decay: float = 0.05
    warmup_frac: float = 0.1
    max_epochs: int = 20
    patience: int = 7
    batch_size: int = 32
    focal_gamma: float = 2.0
    focal_alpha_bonafide: float = 0.75
    focal_alpha_spoof: float = 0.25
    topk: int = 5
    seed: int = 0
    noise_snr_db: Optional[float] = None

    @property
    def focal_alpha(self):
        """(bonafide, spoof) weights indexed by label"""
        return (self.focal_alpha_bonafide, self.focal_alpha_spoof)

    def validate(self):
        """Raise ConfigError unless every invariant holds"""
        if self.peak_lr < 0:
            raise ConfigError(f"peak_lr must be >= 0, got {self.peak_lr}")
        for name in ('beta1', 'beta2'):
            value = getattr(self, name)
            if not 0.0 <= value < 1.0:
                raise ConfigError(f"{name} must lie in [0, 1), got {value}")
        if self.eps <= 0:
            raise ConfigError(f"eps must be > 0, got {self.eps}")
        if self.weight_decay < 0:
            raise ConfigError(f"weight_decay must be >= 0, got {self.weight_decay}")
        if not 0.0 < self.warmup_frac < 1.0:
            raise ConfigError(f"warmup_frac must lie in (0, 1), got {self.warmup_frac}")
        if self.max_epochs < 1:
            raise ConfigError(f"max_epochs must be >= 1, got {self.max_epochs}")
        if not 1 <= self.patience <= self.max_epochs:
            raise ConfigError(f"patience must lie in [1, max_epochs={self.max_epochs}], got {self.patience}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.focal_gamma < 0:
            raise ConfigError(f"focal_gamma must be >= 0, got {self.focal_gamma}")
        for name in ('focal_alpha_bonafide', 'focal_alpha_spoof'):
            value = getattr(self, name)
            if not 0.0 < value <= 1.0:
                raise ConfigError(f"{name} must lie in (0, 1], got {value}")
        if self.topk < 1:
            raise ConfigError(f"topk must be >= 1, got {self.topk}")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        return self
