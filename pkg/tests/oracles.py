"""Independent reference implementations used by the tests.

Nothing here imports the solver or framelet code; the operators are
written directly from their definitions with explicit loops or dense
matrices.
"""

import numpy as np


def blur_matrix(kernel, shape):
    """Dense matrix of periodic convolution with a centered odd kernel."""
    h, w = shape
    kh, kw = kernel.shape
    ch, cw = kh // 2, kw // 2
    n = h * w
    M = np.zeros((n, n))
    for r in range(h):
        for c in range(w):
            row = r * w + c
            for i in range(kh):
                for j in range(kw):
                    rr, cc = (r - (i - ch)) % h, (c - (j - cw)) % w
                    M[row, rr * w + cc] += kernel[i, j]
    return M


def forward_diff(shape):
    """Periodic forward differences u_i - u_{i+e} along columns and rows."""
    h, w = shape
    n = h * w
    Dc = np.zeros((n, n))
    Dr = np.zeros((n, n))
    for r in range(h):
        for c in range(w):
            i = r * w + c
            Dc[i, i] += 1
            Dc[i, r * w + (c + 1) % w] -= 1
            Dr[i, i] += 1
            Dr[i, ((r + 1) % h) * w + c] -= 1
    return np.vstack([Dc, Dr])


def tv_aniso_objective(u, z, K, D, lam):
    """0.5 |K u - z|^2 + (lam / 4) |D u|_1 on flattened images."""
    r = K @ u - z
    return 0.5 * r @ r + 0.25 * lam * np.sum(np.abs(D @ u))


def prox_tv_box(y, D, weight, iters=5000, tol=1e-13):
    """prox of weight*|D.|_1 + box[0,1] at y by fast dual projection (FGP)."""
    L = 8.0  # |D|^2 for periodic 2D forward differences
    p = np.zeros(D.shape[0])
    q = p.copy()
    t = 1.0
    for _ in range(iters):
        x = np.clip(y - weight * D.T @ q, 0.0, 1.0)
        p_new = np.clip(q + D @ x / (L * weight), -1.0, 1.0)
        t_new = (1 + np.sqrt(1 + 4 * t * t)) / 2
        q = p_new + (t - 1) / t_new * (p_new - p)
        if np.max(np.abs(p_new - p)) < tol:
            p = p_new
            break
        p, t = p_new, t_new
    return np.clip(y - weight * D.T @ p, 0.0, 1.0)


def fista_tv_aniso(z, kernel, lam, shape, max_iters=20000, tol=1e-10):
    """Proximal gradient (FISTA) for 0.5|Ku - z|^2 + lam/4 |Du|_1 + box."""
    K = blur_matrix(kernel, shape)
    D = forward_diff(shape)
    z = np.ravel(z)
    L = np.linalg.norm(K, 2) ** 2
    step = 1.0 / L
    weight = step * lam / 4.0
    x = np.zeros(z.size)
    y = x.copy()
    t = 1.0
    rel = np.inf
    for _ in range(max_iters):
        x_new = prox_tv_box(y - step * K.T @ (K @ y - z), D, weight)
        t_new = (1 + np.sqrt(1 + 4 * t * t)) / 2
        y = x_new + (t - 1) / t_new * (x_new - x)
        rel = np.linalg.norm(x_new - x) / max(np.linalg.norm(x), 1e-30)
        x, t = x_new, t_new
        if rel < tol:
            break
    return x.reshape(shape), tv_aniso_objective(x, z, K, D, lam), rel


def scalar_prox_numeric(f, x, lo, hi, grid=4001, refine=60):
    """argmin_u 0.5 (u - x)^2 + f(u) by a grid scan and golden-section refinement.

    ``f`` must accept numpy arrays.
    """
    us = np.linspace(lo, hi, grid)
    vals = 0.5 * (us - x) ** 2 + f(us)
    i = int(np.argmin(vals))
    a, b = us[max(i - 1, 0)], us[min(i + 1, grid - 1)]
    g = (np.sqrt(5) - 1) / 2
    obj = lambda u: 0.5 * (u - x) ** 2 + f(u)  # noqa: E731
    c, d = b - g * (b - a), a + g * (b - a)
    for _ in range(refine):
        if obj(c) < obj(d):
            b = d
        else:
            a = c
        c, d = b - g * (b - a), a + g * (b - a)
    return 0.5 * (a + b)


def _golden(obj, lo, hi, iters=80):
    """Golden-section search on [lo, hi]; ``lo``/``hi`` may be arrays (vectorized)."""
    g = (np.sqrt(5) - 1) / 2
    a, b = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
    for _ in range(iters):
        c, d = b - g * (b - a), a + g * (b - a)
        left = obj(c) < obj(d)
        b = np.where(left, d, b)
        a = np.where(left, a, c)
    return 0.5 * (a + b)


def pair_prox_numeric(lam, a, b, grid=721, local=41, rounds=8):
    """argmin over (p, q) of 0.5|(p,q) - (a,b)|^2 + lam |(p,q)|_2, numerically.

    Along each direction phi the objective is convex in the radius r >= 0
    and is minimized by golden-section search. The resulting profile over
    phi is unimodal on the circle; it is scanned on a grid and then on
    successively finer local grids around the best angle.
    """
    rmax = np.hypot(a, b) + lam + 1.0

    def f(r, phi):
        return 0.5 * ((r * np.cos(phi) - a) ** 2 + (r * np.sin(phi) - b) ** 2) + lam * r

    def best_radius(phi):
        # expanded form of f along the ray, with the trigonometry hoisted
        proj = a * np.cos(phi) + b * np.sin(phi)
        ray = lambda rr: 0.5 * rr * rr - rr * proj + lam * rr  # noqa: E731
        r = _golden(ray, np.zeros_like(phi), np.full_like(phi, rmax), iters=64)
        # the constrained minimum may sit at the boundary r = 0
        return np.where(ray(r) <= 0.0, r, 0.0)

    phis = np.linspace(-np.pi, np.pi, grid)
    for _ in range(rounds + 1):
        vals = f(best_radius(phis), phis)
        i = int(np.argmin(vals))
        step = phis[1] - phis[0]
        phis = np.linspace(phis[i] - step, phis[i] + step, local)
    phi = phis[local // 2]
    r = float(best_radius(np.array([phi]))[0])
    return r * np.cos(phi), r * np.sin(phi)
