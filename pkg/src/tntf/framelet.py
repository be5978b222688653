"""Tight framelet filter banks and the undecimated framelet transform.

Filters are indexed by ``(row, col)`` offsets relative to an anchor. The
analysis step correlates with the (dilated) filter, i.e. convolves with its
flipped conjugate; the synthesis step convolves with the filter itself.
Boundaries wrap periodically, which makes analysis and synthesis exact
adjoints on finite grids.
"""

from dataclasses import dataclass, field
import itertools
import json
from pathlib import Path

import numpy as np

from . import _backend


@dataclass(frozen=True)
class Filter:
    taps: np.ndarray
    anchor: tuple = (0, 0)

    def __post_init__(self):
        taps = np.array(self.taps, dtype=np.float64)
        if taps.ndim != 2 or not np.all(np.isfinite(taps)):
            raise ValueError("filter taps must be a finite 2D array")
        taps.setflags(write=False)
        object.__setattr__(self, "taps", taps)
        object.__setattr__(self, "anchor", tuple(int(a) for a in self.anchor))

    @property
    def shape(self):
        return self.taps.shape

    def offsets(self):
        """Yield ``((dr, dc), tap)`` for every tap, offsets relative to the anchor."""
        ar, ac = self.anchor
        for (a, b), t in np.ndenumerate(self.taps):
            yield (a - ar, b - ac), t

    def symbol(self, xi1, xi2):
        """Fourier series sum_k h(k) exp(-i k.xi) by direct summation."""
        xi1 = np.asarray(xi1, dtype=np.float64)
        xi2 = np.asarray(xi2, dtype=np.float64)
        out = np.zeros(np.broadcast(xi1, xi2).shape, dtype=np.complex128)
        for (k1, k2), t in self.offsets():
            if t != 0.0:
                out += t * np.exp(-1j * (k1 * xi1 + k2 * xi2))
        return out


@dataclass(frozen=True)
class FilterBank:
    lowpass: Filter
    highpass: tuple
    dilation: int = 1
    name: str = ""

    def __post_init__(self):
        if self.dilation < 1:
            raise ValueError("dilation must be a positive integer")
        object.__setattr__(self, "highpass", tuple(self.highpass))
        shapes = {self.lowpass.shape, *(f.shape for f in self.highpass)}
        anchors = {self.lowpass.anchor, *(f.anchor for f in self.highpass)}
        if len(shapes) != 1 or len(anchors) != 1:
            raise ValueError("all filters of a bank must share shape and anchor")

    @property
    def filters(self):
        return (self.lowpass,) + self.highpass

    @property
    def anchor(self):
        return self.lowpass.anchor

    @property
    def extent(self):
        return max(self.lowpass.shape)

    def stacked(self, highpass_only=False):
        fs = self.highpass if highpass_only else self.filters
        return np.stack([f.taps for f in fs])

    def with_dilation(self, dilation):
        return FilterBank(self.lowpass, self.highpass, dilation, self.name)


def dhf_bank(dilation=1):
    """Directional Haar framelet: one low-pass and six 2x2 high-pass filters."""
    q = 0.25
    taps = [
        [[1, 1], [1, 1]],
        [[1, 0], [0, -1]],
        [[0, -1], [1, 0]],
        [[1, -1], [0, 0]],
        [[1, 0], [-1, 0]],
        [[0, 0], [1, -1]],
        [[0, 1], [0, -1]],
    ]
    fs = [Filter(q * np.array(t, dtype=np.float64), (0, 0)) for t in taps]
    return FilterBank(fs[0], fs[1:], dilation, "dhf")


DCT_ROWS = np.array([
    np.sqrt(3) / 3 * np.array([1.0, 1.0, 1.0]),
    np.sqrt(2) / 2 * np.array([1.0, 0.0, -1.0]),
    np.sqrt(6) / 6 * np.array([1.0, -2.0, 1.0]),
])


def dct_bank(dilation=1):
    """3x3 DCT-II framelet: filter 3i+j is outer(c_i, c_j) / 3, anchored at the center."""
    fs = [Filter(np.outer(DCT_ROWS[i], DCT_ROWS[j]) / 3.0, (1, 1))
          for i in range(3) for j in range(3)]
    return FilterBank(fs[0], fs[1:], dilation, "dct")


def _check_fits(shape, extent, dilation):
    span = dilation * (extent - 1) + 1
    if span > min(shape):
        raise ValueError(f"dilated filter span {span} does not fit image {tuple(shape)}")


def bank_analysis(img, taps, anchor, dilation, backend=None):
    """Stack of periodic correlations of ``img`` with each filter in ``taps``."""
    img = np.asarray(img, dtype=np.float64)
    _check_fits(img.shape, max(np.shape(taps)[1:]), dilation)
    k = backend or _backend.kernels
    return k.analysis_bank(img, taps, anchor, dilation)


def bank_synthesis(coeffs, taps, anchor, dilation, backend=None):
    """Sum of periodic convolutions; adjoint of :func:`bank_analysis`."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    _check_fits(coeffs.shape[1:], max(np.shape(taps)[1:]), dilation)
    k = backend or _backend.kernels
    return k.synthesis_bank(coeffs, taps, anchor, dilation)


def convolve_periodic(img, f, dilation=1, adjoint=False):
    """Analysis correlation with ``f`` (``adjoint=False``) or synthesis convolution."""
    taps = f.taps[None]
    if adjoint:
        return bank_synthesis(np.asarray(img)[None], taps, f.anchor, dilation)
    return bank_analysis(img, taps, f.anchor, dilation)[0]


@dataclass
class CoefficientPyramid:
    """High-pass planes per level (finest first) plus the final low-pass plane."""

    levels: list
    coarse: np.ndarray
    shape: tuple
    dilations: list = field(default_factory=list)

    def scaled(self, alpha):
        return CoefficientPyramid([alpha * w for w in self.levels], alpha * self.coarse,
                                  self.shape, list(self.dilations))

    def planes(self):
        """Yield ``(level_index, filter_index, plane)``, coarse plane last with filter 0."""
        for j, w in enumerate(self.levels):
            for ell, plane in enumerate(w, start=1):
                yield j, ell, plane
        yield len(self.levels) - 1, 0, self.coarse


def udfmt_decompose(img, banks):
    """Multi-level undecimated framelet decomposition.

    ``banks`` is ordered from the finest level to the coarsest; each bank
    carries its own dilation.
    """
    v = np.asarray(img, dtype=np.float64)
    levels = []
    for bank in banks:
        out = bank_analysis(v, bank.stacked(), bank.anchor, bank.dilation)
        levels.append(out[1:])
        v = out[0]
    return CoefficientPyramid(levels, v, np.asarray(img).shape, [b.dilation for b in banks])


def udfmt_reconstruct(pyr, banks):
    if len(pyr.levels) != len(banks):
        raise ValueError(f"pyramid has {len(pyr.levels)} levels but {len(banks)} banks given")
    v = pyr.coarse
    for w, bank in zip(reversed(pyr.levels), reversed(banks)):
        if w.shape[0] != len(bank.highpass):
            raise ValueError(
                f"level has {w.shape[0]} high-pass planes, bank {bank.name!r} has {len(bank.highpass)}")
        v = bank_synthesis(np.concatenate([v[None], w]), bank.stacked(), bank.anchor, bank.dilation)
    return v


def verify_tffb(bank, grid=64):
    """Residuals of the tight framelet filter bank and partition-of-unity conditions.

    Returns a dict with ``max_tffb_residual`` (all shifts omega in {0,1}^2)
    and ``max_pou_residual`` (omega = 0 only).
    """
    if grid < 8:
        raise ValueError("grid must be at least 8")
    t = 2 * np.pi * np.arange(grid) / grid
    xi1, xi2 = np.meshgrid(t, t, indexing="ij")
    worst = 0.0
    pou = 0.0
    for w1, w2 in itertools.product((0, 1), repeat=2):
        acc = np.zeros_like(xi1, dtype=np.complex128)
        for f in bank.filters:
            acc += f.symbol(xi1, xi2) * np.conj(f.symbol(xi1 + np.pi * w1, xi2 + np.pi * w2))
        target = 1.0 if (w1, w2) == (0, 0) else 0.0
        res = float(np.max(np.abs(acc - target)))
        worst = max(worst, res)
        if (w1, w2) == (0, 0):
            pou = res
    return {"max_tffb_residual": worst, "max_pou_residual": pou}


def dump_pyramid(pyr, banks, directory):
    """Write each plane as PGM (min-max stretched) plus ``index.json``."""
    from .imagecore import write_image

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    entries = []
    for j, ell, plane in pyr.planes():
        name = f"level{j}_filter{ell}.pgm"
        lo, hi = float(plane.min()), float(plane.max())
        scaled = (plane - lo) / (hi - lo) if hi > lo else np.zeros_like(plane)
        write_image(scaled, directory / name)
        entries.append({"file": name, "level": j, "filter": ell, "bank": banks[j].name,
                        "dilation": banks[j].dilation, "min": lo, "max": hi})
    (directory / "index.json").write_text(json.dumps(entries, indent=2, sort_keys=True))
    return entries
