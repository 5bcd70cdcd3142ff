"""
Runtime Detection and Numeric Profile

Detects the torch runtime and fixes the numeric settings every run relies on:

- Production path: float32 tensors, used for training and scoring
- Reference path: float64 tensors, used by oracles and gradient checks
- Determinism: single intra-op thread and deterministic kernels, so identical
  seeds give byte-identical checkpoints and score files on one platform
"""

import logging
import os

import torch

from ..errors import ConfigError

logger = logging.getLogger(__name__)


class NumericPath:
    """Precision tiers"""
    PRODUCTION = 'production'   # float32
    REFERENCE = 'reference'     # float64


class RuntimeProfile:
    """
    Measures the torch runtime and applies deterministic settings.
    """

    def __init__(self, threads=None):
        self.torch_version = torch.__version__
        self.cpu_count = os.cpu_count() or 1
        self.threads = threads or 1
        self.production_dtype = torch.float32
        self.reference_dtype = torch.float64
        self._apply()

    def _apply(self):
        """Pin threads and request deterministic kernels"""
        torch.set_num_threads(self.threads)
        torch.use_deterministic_algorithms(True)
        logger.debug("runtime torch=%s threads=%d deterministic=on",
                     self.torch_version, self.threads)

    def dtype(self, path=NumericPath.PRODUCTION):
        """Tensor dtype for a precision tier"""
        if path == NumericPath.REFERENCE:
            return self.reference_dtype
        if path == NumericPath.PRODUCTION:
            return self.production_dtype
        raise ConfigError(f"Unknown numeric path: {path}")

    def __repr__(self):
        return (f"RuntimeProfile(torch={self.torch_version}, "
                f"threads={self.threads}/{self.cpu_count}, "
                f"production={self.production_dtype}, "
                f"reference={self.reference_dtype})")


# Global runtime profile - initialized once
_profile = None


def get_profile():
    """Get the global runtime profile (singleton)"""
    global _profile
    if _profile is None:
        _profile = RuntimeProfile()
    return _profile
