"""
Additive white-noise augmentation for training batches.
"""

import numpy as np
import torch

SNR_SPAN_DB = 10.0


def add_noise(x, snr_db, rng):
    """
    Add white Gaussian noise at a per-utterance SNR.

    Args:
        x: (B, T, F) tensor
        snr_db: lower SNR bound; each utterance draws from [snr_db, snr_db + 10]
        rng: numpy Generator

    Returns:
        Tensor: noisy copy of x
    """
    batch = x.shape[0]
    snr = rng.uniform(snr_db, snr_db + SNR_SPAN_DB, size=batch)
    power = x.detach().double().pow(2).mean(dim=(1, 2)).numpy()
    std = np.sqrt(power / 10.0 ** (snr / 10.0))
    noise = rng.standard_normal(tuple(x.shape)) * std[:, None, None]
    return x + torch.from_numpy(noise).to(x.dtype)
