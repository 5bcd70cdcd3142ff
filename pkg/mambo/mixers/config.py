"""
Mixer configuration and per-step scan coefficients.

MixerConfig describes one sequence mixer; StepCoefficients is what a mixer's
projections produce from its input before the scan runs. Keeping the
coefficients as a separate value lets the scans be checked against their
materialized matrices with the coefficients frozen.
"""

from dataclasses import dataclass
from typing import Optional

import torch

from ..errors import ConfigError, RangeError, ShapeError
from ..util.checks import check_finite


class MixerKind:
    """Sequence mixer families"""
    MAMBA = 'MAMBA'      # per-channel selective scan
    MAMBA2 = 'MAMBA2'    # scalar-decay headed scan
    HYDRA = 'HYDRA'      # quasiseparable bidirectional mixer
    GDN = 'GDN'          # gated delta rule

    ALL = (MAMBA, MAMBA2, HYDRA, GDN)
    HEADED = (MAMBA2, HYDRA, GDN)

    @staticmethod
    def parse(value):
        kind = str(value).strip().upper()
        if kind not in MixerKind.ALL:
            raise ConfigError(f"Unknown mixer kind: {value!r} (expected one of {', '.join(MixerKind.ALL)})")
        return kind


@dataclass
class MixerConfig:
    """
    Architecture of one sequence mixer.

    Args:
        kind: MixerKind value
        model_dim: D, channels in and out
        state_dim: S, per-channel (MAMBA) or per-head state size
        head_dim: P, channels per head for headed kinds
        expand: E, inner width is D * E
        conv_width: causal depthwise convolution length
    """
    kind: str = MixerKind.MAMBA
    model_dim: int = 128
    state_dim: int = 64
    head_dim: int = 32
    expand: int = 2
    conv_width: int = 4

    def __post_init__(self):
        self.kind = MixerKind.parse(self.kind)

    @property
    def inner_dim(self):
        return self.model_dim * self.expand

    @property
    def n_heads(self):
        if self.kind not in MixerKind.HEADED:
            return self.inner_dim
        return self.inner_dim // self.head_dim

    @property
    def dt_rank(self):
        return max(1, -(-self.model_dim // 16))

    def validate(self):
        """Raise ConfigError unless every invariant holds"""
        if self.model_dim < 1:
            raise ConfigError(f"model_dim must be >= 1, got {self.model_dim}")
        if self.state_dim < 1:
            raise ConfigError(f"state_dim must be >= 1, got {self.state_dim}")
        if self.expand < 1:
            raise ConfigError(f"expand must be >= 1, got {self.expand}")
        if self.conv_width < 1:
            raise ConfigError(f"conv_width must be >= 1, got {self.conv_width}")
        if self.head_dim < 1:
            raise ConfigError(f"head_dim must be >= 1, got {self.head_dim}")
        if self.kind in MixerKind.HEADED and self.inner_dim % self.head_dim != 0:
            raise ConfigError(
                f"inner width {self.inner_dim} (model_dim*expand) is not divisible "
                f"by head_dim {self.head_dim}")
        return self


@dataclass
class StepCoefficients:
    """
    Input-dependent scan coefficients for one batch of sequences.

    Layouts (B batch, T frames, C inner channels, H heads, P head dim, S state):

    - MAMBA:  value (B,T,C); delta (B,T,C) > 0; A (C,S) < 0;
              B, C (B,T,S); skip (C,)
    - MAMBA2: value (B,T,H,P); decay (B,T,H) in (0,1], or log_decay (B,T,H)
              <= 0; key, query (B,T,H,S); skip (H,)
    - HYDRA:  as MAMBA2, plus diag (B,T,H); no skip
    - GDN:    value (B,T,H,P); decay or log_decay as MAMBA2; beta (B,T,H) in [0,1];
              key (unit norm), query (B,T,H,S)

    Mixers fill log_decay: a long product of decays underflows float32 to 0,
    its log does not. When both are set log_decay wins.
    """
    kind: str
    value: torch.Tensor
    delta: Optional[torch.Tensor] = None
    A: Optional[torch.Tensor] = None
    B: Optional[torch.Tensor] = None
    C: Optional[torch.Tensor] = None
    decay: Optional[torch.Tensor] = None
    key: Optional[torch.Tensor] = None
    query: Optional[torch.Tensor] = None
    beta: Optional[torch.Tensor] = None
    diag: Optional[torch.Tensor] = None
    skip: Optional[torch.Tensor] = None
    log_decay: Optional[torch.Tensor] = None

    @property
    def length(self):
        return self.value.shape[1]

    def tensors(self):
        """Named non-empty fields"""
        names = ('value', 'delta', 'A', 'B', 'C', 'decay', 'log_decay',
                 'key', 'query', 'beta', 'diag', 'skip')
        return {n: getattr(self, n) for n in names if getattr(self, n) is not None}

    def decay_values(self):
        """Per-step decay in (0, 1]; may round to 0 when built from log_decay"""
        return torch.exp(self.log_decay) if self.log_decay is not None else self.decay

    def decay_logs(self):
        """Per-step log decay, exact when the mixer supplied log_decay"""
        return self.log_decay if self.log_decay is not None else torch.log(self.decay)

    def detached(self):
        """Copy with every tensor detached (frozen coefficients)"""
        fields = {n: t.detach() for n, t in self.tensors().items()}
        return StepCoefficients(kind=self.kind, **fields)

    def to(self, dtype):
        fields = {n: t.to(dtype) for n, t in self.tensors().items()}
        return StepCoefficients(kind=self.kind, **fields)


def validate_coefficients(coeffs, value=None):
    """
    Check the coefficient invariants a scan relies on.

    Args:
        coeffs: StepCoefficients
        value: optional value stream that must match coeffs in length

    Raises:
        ShapeError: lengths or required fields do not match
        NonFiniteError: a coefficient is NaN or infinite
        RangeError: a range invariant is violated
    """
    kind = MixerKind.parse(coeffs.kind)
    for name, t in coeffs.tensors().items():
        check_finite(t, f"coefficient '{name}'")

    if value is not None and value.shape[:2] != coeffs.value.shape[:2]:
        raise ShapeError(
            f"value stream has {value.shape[1]} frames but coefficients have {coeffs.length}")

    required = {
        MixerKind.MAMBA: ('delta', 'A', 'B', 'C', 'skip'),
        MixerKind.MAMBA2: ('decay', 'key', 'query', 'skip'),
        MixerKind.HYDRA: ('decay', 'key', 'query', 'diag'),
        MixerKind.GDN: ('decay', 'key', 'query', 'beta'),
    }[kind]
    for name in required:
        t = getattr(coeffs, name)
        if name == 'decay' and coeffs.log_decay is not None:
            t = coeffs.log_decay
        if t is None:
            raise ShapeError(f"{kind} coefficients need '{name}'")
        if name not in ('A', 'skip') and t.shape[1] != coeffs.length:
            raise ShapeError(
                f"coefficient '{name}' has {t.shape[1]} frames, value stream has {coeffs.length}")

    if kind == MixerKind.MAMBA:
        if not bool((coeffs.delta > 0).all()):
            raise RangeError("step sizes delta must be strictly positive")
    elif coeffs.log_decay is not None:
        if not bool((coeffs.log_decay <= 0).all()):
            raise RangeError(f"{kind} log decay must be <= 0")
    else:
        # a decay of exactly 1 is the decayless limit (float32 rounding reaches it too)
        if not bool(((coeffs.decay > 0) & (coeffs.decay <= 1)).all()):
            raise RangeError(f"{kind} decay outside its allowed range")
    if kind == MixerKind.GDN:
        if not bool(((coeffs.beta >= 0) & (coeffs.beta <= 1)).all()):
            raise RangeError("write strengths beta must lie in [0, 1]")
