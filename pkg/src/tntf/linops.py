"""Linear operators of the restoration model.

Stacked coefficient vectors are arrays of shape ``(planes, height, width)``;
``reshape(-1)`` gives the plane-major layout where subband ``l`` occupies
entries ``[l*n, (l+1)*n)``.
"""

from dataclasses import dataclass, field

import numpy as np

from .framelet import Filter, FilterBank, bank_analysis, bank_synthesis, dct_bank, dhf_bank

ANALYSIS_MODES = ("tntf", "dhf-only", "dct-only", "dhf+dct")


def average_kernel(size=5):
    """Normalized ``size x size`` box kernel, centered."""
    return Filter(np.full((size, size), 1.0 / size ** 2), (size // 2, size // 2))


@dataclass(frozen=True)
class BlurOperator:
    kernel: Filter = field(default_factory=average_kernel)

    def __post_init__(self):
        if abs(self.kernel.taps.sum() - 1.0) > 1e-12:
            raise ValueError("blur kernel taps must sum to 1")

    def _check(self, img):
        h, w = self.kernel.shape
        if img.shape[0] < h or img.shape[1] < w:
            raise ValueError(f"image {img.shape} smaller than blur kernel {self.kernel.shape}")

    def _passes(self, adjoint):
        # K convolves with the kernel, K^T correlates; rank-1 kernels run as two 1D passes
        key = ("adj" if adjoint else "fwd")
        cache = self.__dict__.setdefault("_pass_cache", {})
        if key not in cache:
            taps, (ar, ac) = self.kernel.taps, self.kernel.anchor
            h, w = taps.shape
            if not adjoint:
                taps, ar, ac = taps[::-1, ::-1], h - 1 - ar, w - 1 - ac
            U, S, Vt = np.linalg.svd(taps)
            if S.size > 1 and S[1] <= 1e-14 * S[0]:
                col = U[:, 0] * S[0]
                row = Vt[0]
                sign = 1.0 if row.sum() >= 0 else -1.0
                cache[key] = [(sign * col.reshape(1, h, 1), (ar, 0)),
                              (sign * row.reshape(1, 1, w), (0, ac))]
            else:
                cache[key] = [(taps[None], (ar, ac))]
        return cache[key]

    def apply(self, img, adjoint=False):
        img = np.asarray(img, dtype=np.float64)
        self._check(img)
        for taps, anchor in self._passes(adjoint):
            img = bank_analysis(img, taps, anchor, 1)[0]
        return img

    def __call__(self, img):
        return self.apply(img)

    def T(self, img):
        return self.apply(img, adjoint=True)


def blur_apply(K, img, adjoint=False):
    return K.apply(img, adjoint)


@dataclass(frozen=True)
class AnalysisOperator:
    """Stacked framelet analysis ``A``.

    ``tntf``: s1 = DHF high-pass of u, s2 = DCT high-pass of the DHF low-pass
    of u. ``dhf+dct`` applies the DCT bank to u directly; ``dhf-only`` and
    ``dct-only`` keep a single block.
    """

    mode: str = "tntf"
    dhf: FilterBank = field(default_factory=lambda: dhf_bank(1))
    dct: FilterBank = field(default_factory=lambda: dct_bank(2))

    def __post_init__(self):
        if self.mode not in ANALYSIS_MODES:
            raise ValueError(f"unknown analysis mode {self.mode!r}")

    @property
    def has_s1(self):
        return self.mode != "dct-only"

    @property
    def has_s2(self):
        return self.mode != "dhf-only"

    def block_sizes(self, n):
        return (6 * n if self.has_s1 else 0, 8 * n if self.has_s2 else 0)

    def apply(self, img):
        """Return ``(s1, s2)``; an absent block is ``None``."""
        img = np.asarray(img, dtype=np.float64)
        s1 = s2 = None
        if self.mode in ("tntf", "dhf-only", "dhf+dct"):
            out = bank_analysis(img, self.dhf.stacked(), self.dhf.anchor, self.dhf.dilation)
            s1 = out[1:]
            low = out[0]
        if self.mode == "tntf":
            s2 = bank_analysis(low, self.dct.stacked(True), self.dct.anchor, self.dct.dilation)
        elif self.mode in ("dct-only", "dhf+dct"):
            s2 = bank_analysis(img, self.dct.stacked(True), self.dct.anchor, self.dct.dilation)
        return s1, s2

    def adjoint(self, s1, s2):
        """``A^T s``: B1h^T s1 + B1l^T B2h^T s2 (blocks per mode)."""
        self._check_blocks(s1, s2)
        if self.mode == "tntf":
            low = bank_synthesis(s2, self.dct.stacked(True), self.dct.anchor, self.dct.dilation)
            stack = np.concatenate([low[None], s1])
            return bank_synthesis(stack, self.dhf.stacked(), self.dhf.anchor, self.dhf.dilation)
        out = None
        if self.has_s1:
            out = bank_synthesis(s1, self.dhf.stacked(True), self.dhf.anchor, self.dhf.dilation)
        if self.has_s2:
            d = bank_synthesis(s2, self.dct.stacked(True), self.dct.anchor, self.dct.dilation)
            out = d if out is None else out + d
        return out

    def _check_blocks(self, s1, s2):
        if self.has_s1 and (s1 is None or np.shape(s1)[0] != 6):
            raise ValueError(f"mode {self.mode} expects a 6-plane s1 block")
        if self.has_s2 and (s2 is None or np.shape(s2)[0] != 8):
            raise ValueError(f"mode {self.mode} expects an 8-plane s2 block")
        if not self.has_s1 and s1 is not None:
            raise ValueError(f"mode {self.mode} has no s1 block")
        if not self.has_s2 and s2 is not None:
            raise ValueError(f"mode {self.mode} has no s2 block")

    def lowpass_residual(self, img):
        """B2l B1l u, the part of u the tntf operator does not see."""
        low = bank_analysis(img, self.dhf.lowpass.taps[None], self.dhf.anchor, self.dhf.dilation)[0]
        return bank_analysis(low, self.dct.lowpass.taps[None], self.dct.anchor, self.dct.dilation)[0]


def analysis_apply(A, img):
    return A.apply(img)


def analysis_adjoint(A, s1, s2):
    return A.adjoint(s1, s2)


def stack_blocks(s1, s2):
    """Concatenate present blocks into one plane-major vector."""
    parts = [np.ravel(b) for b in (s1, s2) if b is not None]
    return np.concatenate(parts) if parts else np.zeros(0)


def operator_norm(apply, adjoint, n, iters=100, seed=0, method="lanczos"):
    """Largest singular value of a linear operator from a seeded random start.

    ``method="power"`` is plain power iteration on ``adjoint(apply(x))``.
    ``method="lanczos"`` (default) runs ``iters`` Lanczos steps with full
    reorthogonalization on the same start vector, i.e. the power iteration's
    Krylov space; it resolves tightly clustered top eigenvalues that plain
    power iteration only approaches at rate O(1/iters). ``n`` is the input
    shape (int or tuple). A zero operator returns 0.
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    shape = (n,) if np.isscalar(n) else tuple(n)
    x = np.random.default_rng(seed).standard_normal(shape)
    x /= np.linalg.norm(x)

    def gram(z):
        return np.asarray(adjoint(apply(z)), dtype=np.float64)

    if method == "power":
        est = 0.0
        for _ in range(iters):
            y = gram(x)
            nrm = np.linalg.norm(y)
            if nrm == 0.0:
                return 0.0
            est = float(np.vdot(x, y))
            x = y / nrm
        return float(np.sqrt(max(est, 0.0)))
    if method != "lanczos":
        raise ValueError(f"unknown method {method!r}")

    steps = min(iters, x.size)
    Q = np.zeros((steps + 1, x.size))
    Q[0] = x.ravel()
    alphas, betas = [], []
    for j in range(steps):
        y = gram(Q[j].reshape(shape)).ravel()
        alphas.append(float(Q[j] @ y))
        # two Gram-Schmidt passes keep the basis orthonormal
        for _ in range(2):
            y -= Q[:j + 1].T @ (Q[:j + 1] @ y)
        beta = float(np.linalg.norm(y))
        if beta <= 1e-13 * max(1.0, abs(alphas[0])):
            break
        betas.append(beta)
        Q[j + 1] = y / beta
    k = len(alphas)
    T = np.diag(alphas) + np.diag(betas[:k - 1], 1) + np.diag(betas[:k - 1], -1)
    top = float(np.linalg.eigvalsh(T)[-1])
    return float(np.sqrt(max(top, 0.0)))
