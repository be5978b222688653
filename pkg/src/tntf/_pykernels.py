"""Pure numpy implementation of the periodic filter-bank kernels.

Both functions take a stack of equally-sized filters ``taps`` with shape
``(L, fh, fw)`` and an ``anchor`` (row, col) giving the tap-grid position of
filter index (0, 0). Filter taps sit at offsets ``dilation * (k - anchor)``.
"""

import numpy as np

NAME = "python"


def _offsets(shape, anchor, dilation):
    fh, fw = shape
    ar, ac = anchor
    return [(a, b, dilation * (a - ar), dilation * (b - ac))
            for a in range(fh) for b in range(fw)]


def analysis_bank(x, taps, anchor, dilation):
    """out[l, r, c] = sum_k taps[l, k] * x[(r, c) + dilation * (k - anchor)]."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    taps = np.asarray(taps, dtype=np.float64)
    out = np.zeros((taps.shape[0],) + x.shape)
    for a, b, dr, dc in _offsets(taps.shape[1:], anchor, dilation):
        col = taps[:, a, b]
        if not col.any():
            continue
        shifted = np.roll(x, (-dr, -dc), axis=(0, 1))
        for ell in np.flatnonzero(col):
            out[ell] += col[ell] * shifted
    return out


def synthesis_bank(w, taps, anchor, dilation):
    """Adjoint of :func:`analysis_bank`: sum over filters of periodic convolutions."""
    w = np.ascontiguousarray(w, dtype=np.float64)
    taps = np.asarray(taps, dtype=np.float64)
    out = np.zeros(w.shape[1:])
    for a, b, dr, dc in _offsets(taps.shape[1:], anchor, dilation):
        col = taps[:, a, b]
        if not col.any():
            continue
        acc = np.zeros(w.shape[1:])
        for ell in np.flatnonzero(col):
            acc += col[ell] * w[ell]
        out += np.roll(acc, (dr, dc), axis=(0, 1))
    return out
