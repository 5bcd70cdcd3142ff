"""
Fixed-length shaping of feature sequences.

66,800 samples at a 320-sample front-end stride gives 208 frames.
"""

import numpy as np

from ..errors import ShapeError

SAMPLES_PER_UTTERANCE = 66800
FRONTEND_STRIDE = 320
DEFAULT_T_FIXED = SAMPLES_PER_UTTERANCE // FRONTEND_STRIDE


def crop_or_pad(x, T_fixed=DEFAULT_T_FIXED, rng=None):
    """
    Bring a (T, F) sequence to exactly T_fixed frames.

    Longer inputs are cropped to a contiguous window: a random start drawn
    from rng in train mode, start 0 in eval mode (rng=None). Shorter inputs
    are tiled whole and truncated.

    Args:
        x: (T, F) array
        T_fixed: output frame count
        rng: np.random.Generator or int seed for train mode, None for eval

    Returns:
        np.ndarray: (T_fixed, F)
    """
    x = np.asarray(x)
    if x.ndim != 2 or x.shape[0] < 1:
        raise ShapeError(f"expected a (T, F) sequence with T >= 1, got shape {x.shape}")
    if T_fixed < 1:
        raise ShapeError(f"T_fixed must be >= 1, got {T_fixed}")
    frames = x.shape[0]
    if frames == T_fixed:
        return x
    if frames > T_fixed:
        start = 0
        if rng is not None:
            start = int(np.random.default_rng(rng).integers(0, frames - T_fixed + 1))
        return x[start:start + T_fixed]
    reps = -(-T_fixed // frames)
    return np.tile(x, (reps, 1))[:T_fixed]
