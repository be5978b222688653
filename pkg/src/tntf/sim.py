"""Degradation: blur with a 5x5 average kernel and add seeded Gaussian noise.

Noise generator
---------------
A counter-based SplitMix64 stream. For seed ``s`` and counter ``c`` the
64-bit output is ``mix(s + (c + 1) * 0x9E3779B97F4A7C15)`` (mod 2**64),
where ``mix`` is the SplitMix64 finalizer. Pixel ``i`` (row-major) uses
counters ``2i`` and ``2i + 1``, giving uniforms
``u1 = ((r0 >> 11) + 1) * 2**-53`` in (0, 1] and ``u2 = (r1 >> 11) * 2**-53``,
and Box-Muller ``sqrt(-2 ln u1) * cos(2 pi u2)``.
"""

from dataclasses import dataclass

import numpy as np

from .linops import BlurOperator, average_kernel

KERNELS = {"average5": lambda: average_kernel(5)}

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def splitmix64(seed, counters):
    """SplitMix64 outputs for the given counters (uint64 array)."""
    c = np.asarray(counters, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(seed % 2 ** 64) + (c + np.uint64(1)) * _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
        return z ^ (z >> np.uint64(31))


def gaussian_field(shape, seed):
    """Standard normal samples, one per pixel, fully determined by ``seed``."""
    n = int(np.prod(shape))
    idx = np.arange(n, dtype=np.uint64)
    r0 = splitmix64(seed, 2 * idx)
    r1 = splitmix64(seed, 2 * idx + np.uint64(1))
    scale = 2.0 ** -53
    u1 = ((r0 >> np.uint64(11)).astype(np.float64) + 1.0) * scale
    u2 = (r1 >> np.uint64(11)).astype(np.float64) * scale
    return (np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)).reshape(shape)


@dataclass(frozen=True)
class DegradationSpec:
    sigma: float
    seed: int = 0
    kernel: str = "average5"

    def __post_init__(self):
        if not self.sigma >= 0:
            raise ValueError(f"sigma must be nonnegative, got {self.sigma}")
        if self.kernel not in KERNELS:
            raise ValueError(f"unknown kernel {self.kernel!r}")
        if self.seed < 0:
            raise ValueError("seed must be unsigned")

    def blur(self):
        return BlurOperator(KERNELS[self.kernel]())


def degrade(u, spec):
    """``K u + sigma * noise``; the result is not clipped."""
    u = np.asarray(u, dtype=np.float64)
    z = spec.blur().apply(u)
    if spec.sigma > 0:
        z = z + spec.sigma * gaussian_field(u.shape, spec.seed)
    return z
