"""PSNR and SSIM on 8-bit scaled images."""

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

PEAK = 255.0


@dataclass(frozen=True)
class QualityReport:
    psnr_db: float
    ssim: float

    def __str__(self):
        return f"PSNR: {self.psnr_db:.2f} dB  SSIM: {self.ssim:.3f}"


def _pair(ref, test):
    ref = np.asarray(ref, dtype=np.float64)
    test = np.asarray(test, dtype=np.float64)
    if ref.shape != test.shape:
        raise ValueError(f"image shapes differ: {ref.shape} vs {test.shape}")
    return ref, test


def psnr(ref, test):
    """10 log10(255^2 / MSE) with both images scaled to [0, 255]; inf if identical."""
    ref, test = _pair(ref, test)
    mse = np.mean((PEAK * (test - ref)) ** 2)
    if mse == 0:
        return float("inf")
    return float(10.0 * np.log10(PEAK ** 2 / mse))


def gaussian_window(size=11, sigma=1.5):
    ax = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(ax ** 2) / (2.0 * sigma ** 2))
    w = np.outer(g, g)
    return w / w.sum()


def ssim_map(ref, test, window=11, sigma=1.5, k1=0.01, k2=0.03):
    ref, test = _pair(ref, test)
    if min(ref.shape) < window:
        raise ValueError(f"images must be at least {window}x{window} for SSIM")
    x, y = PEAK * ref, PEAK * test
    w = gaussian_window(window, sigma)

    def filt(a):
        return ndimage.correlate(a, w, mode="reflect")

    mx, my = filt(x), filt(y)
    sxx = filt(x * x) - mx * mx
    syy = filt(y * y) - my * my
    sxy = filt(x * y) - mx * my
    c1, c2 = (k1 * PEAK) ** 2, (k2 * PEAK) ** 2
    num = (2 * mx * my + c1) * (2 * sxy + c2)
    den = (mx * mx + my * my + c1) * (sxx + syy + c2)
    return num / den


def ssim(ref, test):
    """Mean SSIM, 11x11 Gaussian window (sigma 1.5), symmetric boundary."""
    return float(np.mean(ssim_map(ref, test)))


def quality(ref, test):
    return QualityReport(psnr(ref, test), ssim(ref, test))
