"""Data-driven regularization weights.

First-level weights scale inversely with the local magnitude of the DHF
coefficient pairs; second-level weights follow a local signal-to-noise
estimate of the DCT coefficients. Windows wrap periodically.
"""

from dataclasses import dataclass

import numpy as np

from .framelet import dct_bank
from .prox import AXIS, DIAG, GroupWeightMap, SubbandWeightMap

FLOOR = 1e-10
UPDATE_EVERY = 30
FREEZE_AFTER = 200


@dataclass(frozen=True)
class NoiseModel:
    """Noise level of the observation and per-subband coefficient variances.

    ``gain`` is the variance gain of the filtering applied before the
    second-level bank: 1/4 for the DHF low-pass in the two-level system,
    1 when the DCT bank acts on the image directly.
    """

    sigma: float
    sigma_kappa_sq: np.ndarray

    @classmethod
    def for_bank(cls, sigma, bank=None, gain=0.25):
        if sigma < 0:
            raise ValueError("sigma must be nonnegative")
        bank = bank or dct_bank()
        norms = np.array([np.sum(f.taps ** 2) for f in bank.highpass])
        return cls(float(sigma), gain * sigma ** 2 * norms)


def window_sum(planes, window):
    """Periodic ``window x window`` box sum over the last two axes."""
    if window < 1 or window % 2 == 0:
        raise ValueError("window must be an odd positive integer")
    r = window // 2
    acc = np.zeros_like(planes, dtype=np.float64)
    # separable: rows then columns
    rows = np.zeros_like(acc)
    for d in range(-r, r + 1):
        rows += np.roll(planes, d, axis=-2)
    for d in range(-r, r + 1):
        acc += np.roll(rows, d, axis=-1)
    return acc


def estimate_lambda(s1, base_lambda, window=3):
    """Per-pixel weights for both DHF pairs from the coefficient block ``s1``."""
    if not base_lambda > 0:
        raise ValueError("base_lambda must be positive")
    s1 = np.asarray(s1, dtype=np.float64)
    count = window * window
    maps = []
    for i, j in (DIAG, AXIS):
        local = window_sum(np.hypot(s1[i], s1[j]), window)
        maps.append(base_lambda * count / np.maximum(local, FLOOR))
    return GroupWeightMap(maps[0], maps[1])


def estimate_theta(s2, noise, window=3):
    """Per-pixel, per-subband soft-threshold weights from the block ``s2``."""
    s2 = np.asarray(s2, dtype=np.float64)
    mean_abs = window_sum(np.abs(s2), window) / (window * window)
    var_k = np.asarray(noise.sigma_kappa_sq, dtype=np.float64)[:, None, None]
    local_var = np.maximum(mean_abs ** 2 - var_k, FLOOR)
    return SubbandWeightMap(np.sqrt(2.0) * var_k / np.sqrt(local_var))


def update_schedule(k):
    """Whether the weights are re-estimated at iteration ``k``."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    return k % UPDATE_EVERY == 0 and k <= FREEZE_AFTER
