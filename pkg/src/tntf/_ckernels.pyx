# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled periodic filter-bank kernels.

Same contract as :mod:`tntf._pykernels`. A periodic shift of a row is two
contiguous runs, so every tap is applied as two plain strided loops that
the C compiler can vectorize.
"""

import numpy as np
cimport numpy as cnp
from libc.string cimport memset

cnp.import_array()

NAME = "cython"


cdef inline Py_ssize_t _wrap(Py_ssize_t i, Py_ssize_t n) nogil:
    i = i % n
    if i < 0:
        i += n
    return i


cdef inline void _axpy_shifted(double *out, const double *src, double t,
                               Py_ssize_t off, Py_ssize_t W) nogil:
    # out[c] += t * src[(c + off) mod W], 0 <= off < W
    cdef Py_ssize_t c, n1 = W - off
    for c in range(n1):
        out[c] += t * src[c + off]
    for c in range(n1, W):
        out[c] += t * src[c + off - W]


def analysis_bank(x, taps, anchor, Py_ssize_t dilation):
    cdef const double[:, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[:, :, ::1] tv = np.ascontiguousarray(taps, dtype=np.float64)
    cdef Py_ssize_t L = tv.shape[0], fh = tv.shape[1], fw = tv.shape[2]
    cdef Py_ssize_t H = xv.shape[0], W = xv.shape[1]
    cdef Py_ssize_t ar = anchor[0], ac = anchor[1]
    # rows are zeroed just before use, while they are in cache
    out = np.empty((L, H, W), dtype=np.float64)
    cdef double[:, :, ::1] ov = out
    cdef Py_ssize_t ell, a, b, r
    cdef double t
    with nogil:
        for ell in range(L):
            for r in range(H):
                memset(&ov[ell, r, 0], 0, W * sizeof(double))
                for a in range(fh):
                    for b in range(fw):
                        t = tv[ell, a, b]
                        if t != 0.0:
                            _axpy_shifted(&ov[ell, r, 0],
                                          &xv[_wrap(r + dilation * (a - ar), H), 0], t,
                                          _wrap(dilation * (b - ac), W), W)
    return out


def synthesis_bank(w, taps, anchor, Py_ssize_t dilation):
    cdef const double[:, :, ::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef const double[:, :, ::1] tv = np.ascontiguousarray(taps, dtype=np.float64)
    cdef Py_ssize_t L = tv.shape[0], fh = tv.shape[1], fw = tv.shape[2]
    cdef Py_ssize_t H = wv.shape[1], W = wv.shape[2]
    if wv.shape[0] != L:
        raise ValueError("coefficient stack does not match filter count")
    cdef Py_ssize_t ar = anchor[0], ac = anchor[1]
    out = np.empty((H, W), dtype=np.float64)
    cdef double[:, ::1] ov = out
    cdef Py_ssize_t ell, a, b, r
    cdef double t
    with nogil:
        for r in range(H):
            memset(&ov[r, 0], 0, W * sizeof(double))
            for ell in range(L):
                for a in range(fh):
                    for b in range(fw):
                        t = tv[ell, a, b]
                        if t != 0.0:
                            _axpy_shifted(&ov[r, 0],
                                          &wv[ell, _wrap(r - dilation * (a - ar), H), 0], t,
                                          _wrap(-dilation * (b - ac), W), W)
    return out
