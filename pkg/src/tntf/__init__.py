"""Two-level non-stationary tight-framelet image restoration."""

from . import _backend
from .imagecore import make_synthetic, read_image, write_image
from .metrics import QualityReport, psnr, quality, ssim
from .sim import DegradationSpec, degrade
from .solver import SolverConfig, restore

__version__ = "0.1.0"
backend = _backend.name

__all__ = [
    "DegradationSpec", "QualityReport", "SolverConfig", "backend", "degrade",
    "make_synthetic", "psnr", "quality", "read_image", "restore", "ssim", "write_image",
]
