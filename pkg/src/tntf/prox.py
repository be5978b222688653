"""Proximity operators of the penalty terms.

Coefficient blocks are ``(planes, height, width)`` arrays. First-level
blocks have 6 DHF planes; planes are numbered 0..5 here, so the paired
groups are (0, 1) for the diagonal differences and (2, 3) for the
horizontal/vertical ones. Planes 4 and 5 carry no penalty.
"""

from dataclasses import dataclass

import numpy as np

DIAG = (0, 1)
AXIS = (2, 3)


def _nonneg_map(a, name):
    a = np.asarray(a, dtype=np.float64)
    if not np.all(np.isfinite(a)) or np.any(a < 0):
        raise ValueError(f"{name} must be finite and nonnegative")
    return a


@dataclass(frozen=True)
class GroupWeightMap:
    """Per-pixel first-level weights, one map per coefficient pair.

    ``lambda_diag`` weights the pair (0, 1), ``lambda_axis`` the pair (2, 3).
    ``penalty`` is ``"group"`` (l2 norm per pair) or ``"l1"`` (absolute
    values, the anisotropic TV case).
    """

    lambda_diag: np.ndarray
    lambda_axis: np.ndarray
    penalty: str = "group"

    def __post_init__(self):
        object.__setattr__(self, "lambda_diag", _nonneg_map(self.lambda_diag, "lambda_diag"))
        object.__setattr__(self, "lambda_axis", _nonneg_map(self.lambda_axis, "lambda_axis"))
        if self.penalty not in ("group", "l1"):
            raise ValueError(f"unknown penalty {self.penalty!r}")

    @classmethod
    def constant(cls, shape, diag, axis, penalty="group"):
        return cls(np.full(shape, float(diag)), np.full(shape, float(axis)), penalty)


@dataclass(frozen=True)
class SubbandWeightMap:
    """Per-pixel, per-subband soft-threshold weights, shape ``(8, h, w)``."""

    theta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "theta", _nonneg_map(self.theta, "theta"))


def project_box(v, lo=0.0, hi=1.0):
    return np.clip(v, lo, hi)


def _check_scale(scale):
    if not scale > 0:
        raise ValueError(f"scale must be positive, got {scale}")


def group_shrink(a, b, t):
    """Shrink the 2-vectors (a, b) toward zero by ``t`` in Euclidean norm."""
    norm = np.hypot(a, b)
    denom = np.maximum(norm, t)
    factor = np.divide(t, denom, out=np.zeros_like(norm), where=denom > 0)
    factor = 1.0 - factor
    return factor * a, factor * b


def soft_threshold(v, t):
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def prox_phi1(v, weights, scale):
    """prox of ``scale * Phi1`` on a 6-plane DHF block."""
    _check_scale(scale)
    v = np.asarray(v, dtype=np.float64)
    y = v.copy()
    groups = ((DIAG, weights.lambda_diag), (AXIS, weights.lambda_axis))
    for (i, j), lam in groups:
        t = lam * scale
        if weights.penalty == "group":
            y[i], y[j] = group_shrink(v[i], v[j], t)
        else:
            y[i], y[j] = soft_threshold(v[i], t), soft_threshold(v[j], t)
    return y


def prox_phi2(v, weights, scale):
    """prox of ``scale * Phi2``: componentwise soft thresholding by ``theta * scale``."""
    _check_scale(scale)
    return soft_threshold(np.asarray(v, dtype=np.float64), weights.theta * scale)


def prox_conjugate(prox_direct, t, delta):
    """prox of ``delta * p^*`` via Moreau: ``t - delta * prox_{p/delta}(t / delta)``."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    return t - delta * prox_direct(t / delta)


def phi1_value(v, weights):
    v = np.asarray(v)
    total = 0.0
    for (i, j), lam in ((DIAG, weights.lambda_diag), (AXIS, weights.lambda_axis)):
        if weights.penalty == "group":
            total += float(np.sum(lam * np.hypot(v[i], v[j])))
        else:
            total += float(np.sum(lam * (np.abs(v[i]) + np.abs(v[j]))))
    return total


def phi2_value(v, weights):
    return float(np.sum(weights.theta * np.abs(v)))
