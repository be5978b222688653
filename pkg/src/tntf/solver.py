"""PD3O iteration for box-constrained, framelet-regularized least squares.

Solves ``min_{u in [0,1]^n} 1/2 ||K u - z||^2 + p(A u)`` where ``p`` is the
weighted penalty on the framelet coefficient blocks. One step is

    u   = Proj_[0,1](v)
    x   = gamma A^T s - (2u - v) + gamma K^T (K u - z)
    s+  = prox_{delta p*}(s - delta A x)
    v+  = u - gamma K^T (K u - z) - gamma A^T s+
"""

import csv
import functools
import logging
from dataclasses import dataclass, field, replace

import numpy as np

from . import adapt
from .framelet import Filter
from .linops import AnalysisOperator, BlurOperator, operator_norm
from .prox import (GroupWeightMap, phi1_value, phi2_value, project_box, prox_conjugate,
                   prox_phi1, prox_phi2)

log = logging.getLogger(__name__)

MODES = ("tntf", "tv-aniso", "tv-iso", "dct-only", "dhf+dct")
MODE_ALIASES = {"dct": "dct-only"}
_ANALYSIS_MODE = {
    "tntf": "tntf",
    "tv-aniso": "dhf-only",
    "tv-iso": "dhf-only",
    "dct-only": "dct-only",
    "dhf+dct": "dhf+dct",
}
REL_FLOOR = 1e-30
NORM_MARGIN = 1e-10
# where scheduled weight updates read coefficients from: the analysis of the
# current iterate A u^k, or the proximity-operator input s^k/delta - A x^k
WEIGHT_SOURCES = ("iterate", "prox-input")


class SolverError(Exception):
    pass


class ConfigError(SolverError, ValueError):
    pass


class DivergenceError(SolverError):
    def __init__(self, k, what="iterate"):
        super().__init__(f"non-finite {what} at iteration {k}")
        self.k = k


def canonical_mode(mode):
    mode = MODE_ALIASES.get(mode, mode)
    if mode not in MODES:
        raise ConfigError(f"unknown mode {mode!r}; expected one of {', '.join(MODES)}")
    return mode


@dataclass(frozen=True)
class SolverConfig:
    gamma: float = 1.99
    delta: float = 0.5
    max_iters: int = 400
    rel_tol: float = 1e-9
    base_lambda: float = 2e-4
    sigma: float = 0.0
    mode: str = "tntf"
    param_window: int = 3
    seed: int = 0
    freeze_params: bool = False
    dct_dilation: int = 2
    norm_iters: int = 200
    lambda_source: str = "iterate"
    theta_source: str = "prox-input"

    def __post_init__(self):
        object.__setattr__(self, "mode", canonical_mode(self.mode))
        if not self.gamma > 0 or not self.delta > 0:
            raise ConfigError("gamma and delta must be positive")
        if self.gamma * self.delta >= 1:
            raise ConfigError(f"gamma*delta = {self.gamma * self.delta:g} must be < 1")
        if self.max_iters < 1:
            raise ConfigError("max_iters must be >= 1")
        if self.rel_tol < 0:
            raise ConfigError("rel_tol must be nonnegative")
        if self.base_lambda < 0:
            raise ConfigError("base_lambda must be nonnegative")
        if self.sigma < 0:
            raise ConfigError("sigma must be nonnegative")
        if self.param_window < 1 or self.param_window % 2 == 0:
            raise ConfigError("param_window must be an odd positive integer")
        if self.dct_dilation < 1:
            raise ConfigError("dct_dilation must be positive")
        for name in ("lambda_source", "theta_source"):
            if getattr(self, name) not in WEIGHT_SOURCES:
                raise ConfigError(f"{name} must be one of {', '.join(WEIGHT_SOURCES)}")

    def analysis_operator(self):
        from .framelet import dct_bank, dhf_bank

        return AnalysisOperator(_ANALYSIS_MODE[self.mode], dhf_bank(1), dct_bank(self.dct_dilation))

    def as_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass
class RestorationProblem:
    z: np.ndarray
    K: BlurOperator
    A: AnalysisOperator
    w1: GroupWeightMap = None
    w2: object = None

    def __post_init__(self):
        self.z = np.asarray(self.z, dtype=np.float64)
        if self.z.ndim != 2:
            raise ValueError("observation must be a 2D image")
        if self.A.has_s1 and self.w1 is not None and self.w1.lambda_diag.shape != self.z.shape:
            raise ValueError("first-level weight maps do not match the image")
        if self.A.has_s2 and self.w2 is not None and self.w2.theta.shape != (8,) + self.z.shape:
            raise ValueError("second-level weight maps do not match the image")

    def residual(self, u):
        return self.K.apply(u) - self.z

    def gradient(self, u):
        return self.K.apply(self.residual(u), adjoint=True)

    def penalty(self, s1, s2):
        total = 0.0
        if s1 is not None:
            total += phi1_value(s1, self.w1)
        if s2 is not None:
            total += phi2_value(s2, self.w2)
        return total

    def objective(self, u, residual=None):
        r = self.residual(u) if residual is None else residual
        return 0.5 * float(np.sum(r * r)) + self.penalty(*self.A.apply(u))

    def dual_prox(self, t1, t2, delta):
        """prox of ``delta * p^*`` block by block."""
        s1 = s2 = None
        if t1 is not None:
            s1 = prox_conjugate(lambda w: prox_phi1(w, self.w1, 1.0 / delta), t1, delta)
        if t2 is not None:
            s2 = prox_conjugate(lambda w: prox_phi2(w, self.w2, 1.0 / delta), t2, delta)
        return s1, s2


@dataclass
class SolverState:
    u: np.ndarray
    v: np.ndarray
    s1: np.ndarray = None
    s2: np.ndarray = None
    k: int = 0
    history: list = field(default_factory=list)
    ATs: np.ndarray = None  # cached A^T s

    @classmethod
    def initial(cls, problem):
        shape = problem.z.shape
        A = problem.A
        s1 = np.zeros((6,) + shape) if A.has_s1 else None
        s2 = np.zeros((8,) + shape) if A.has_s2 else None
        v = np.zeros(shape)
        return cls(u=project_box(v), v=v, s1=s1, s2=s2, k=0, ATs=np.zeros(shape))

    def copy(self):
        def c(a):
            return None if a is None else a.copy()

        return SolverState(c(self.u), c(self.v), c(self.s1), c(self.s2), self.k,
                           list(self.history), c(self.ATs))


def _sq(a):
    return 0.0 if a is None else float(np.sum(a * a))


def m_norm(dv, ds1, ds2, A, gamma, delta, ATds=None):
    """``sqrt(|dv|^2 + (gamma/delta)(|ds|^2 - gamma delta |A^T ds|^2))``."""
    if gamma * delta >= 1:
        raise ConfigError("M is not positive definite unless gamma*delta < 1")
    if ATds is None:
        ATds = A.adjoint(ds1, ds2)
    ds_sq = _sq(ds1) + _sq(ds2)
    val = _sq(dv) + (gamma / delta) * (ds_sq - gamma * delta * _sq(ATds))
    return float(np.sqrt(max(val, 0.0)))


def _sub(a, b):
    return None if a is None else a - b


def pd3o_step(state, problem, gamma, delta, record=True, before_prox=None):
    """One PD3O iteration; returns a new state with ``k`` incremented.

    ``before_prox(k, a1, a2)``, if given, sees the proximity-operator inputs
    ``a = s/delta - A x`` of this iteration and may update the weights of
    ``problem`` before they are used.
    """
    A = problem.A
    k = state.k
    u = project_box(state.v)
    resid = problem.residual(u)
    grad = problem.K.apply(resid, adjoint=True)
    ATs = state.ATs if state.ATs is not None else A.adjoint(state.s1, state.s2)
    x = gamma * ATs - (2.0 * u - state.v) + gamma * grad
    if not np.all(np.isfinite(x)):
        raise DivergenceError(k)
    Ax1, Ax2 = A.apply(x)
    t1 = None if state.s1 is None else state.s1 - delta * Ax1
    t2 = None if state.s2 is None else state.s2 - delta * Ax2
    if before_prox is not None:
        before_prox(k, None if t1 is None else t1 / delta, None if t2 is None else t2 / delta)
    s1, s2 = problem.dual_prox(t1, t2, delta)
    ATs_new = A.adjoint(s1, s2)
    v = u - gamma * grad - gamma * ATs_new
    if not np.all(np.isfinite(v)):
        raise DivergenceError(k)

    new = SolverState(u=u, v=v, s1=s1, s2=s2, k=k + 1, history=state.history, ATs=ATs_new)
    if record:
        step = m_norm(v - state.v, _sub(s1, state.s1), _sub(s2, state.s2), A, gamma, delta,
                      ATds=ATs_new - ATs)
        if k == 0:
            rel = float("inf")
        else:
            rel = float(np.linalg.norm(u - state.u) / max(np.linalg.norm(state.u), REL_FLOOR))
        obj = problem.objective(u, resid)
        if not np.isfinite(obj):
            raise DivergenceError(k, "objective")
        new.history = state.history + [
            {"k": k, "objective": obj, "rel_change": rel, "m_norm_step": step}]
    return new


def _lambda_map(cfg, s1):
    if cfg.mode in ("tv-aniso", "tv-iso"):
        penalty = "l1" if cfg.mode == "tv-aniso" else "group"
        return GroupWeightMap.constant(s1.shape[1:], 0.0, cfg.base_lambda, penalty)
    if cfg.base_lambda > 0:
        return adapt.estimate_lambda(s1, cfg.base_lambda, cfg.param_window)
    return GroupWeightMap.constant(s1.shape[1:], 0.0, 0.0)


def _theta_map(cfg, A, s2):
    gain = 0.25 if cfg.mode == "tntf" else 1.0
    noise = adapt.NoiseModel.for_bank(cfg.sigma, A.dct, gain)
    return adapt.estimate_theta(s2, noise, cfg.param_window)


def estimate_weights(problem, cfg, source):
    """Weight maps for ``cfg.mode`` computed from the analysis of the image ``source``.

    The TV modes use a constant weight on the horizontal/vertical pair.
    """
    s1, s2 = problem.A.apply(source)
    w1 = None if s1 is None else _lambda_map(cfg, s1)
    w2 = None if s2 is None else _theta_map(cfg, problem.A, s2)
    return w1, w2


def _reweighter(problem, cfg, state_ref):
    """``before_prox`` hook applying the update schedule."""
    A = problem.A

    def hook(k, a1, a2):
        if k == 0 or cfg.freeze_params or not adapt.update_schedule(k):
            return
        need_iterate = (cfg.lambda_source == "iterate" and a1 is not None) or \
            (cfg.theta_source == "iterate" and a2 is not None)
        c1 = c2 = None
        if need_iterate:
            c1, c2 = A.apply(project_box(state_ref[0].v))
        if a1 is not None:
            problem.w1 = _lambda_map(cfg, c1 if cfg.lambda_source == "iterate" else a1)
        if a2 is not None:
            problem.w2 = _theta_map(cfg, A, c2 if cfg.theta_source == "iterate" else a2)

    return hook


@dataclass
class RestorationResult:
    image: np.ndarray
    history: list
    state: SolverState
    converged: bool
    delta_used: float
    lipschitz: float

    @property
    def iterations(self):
        return self.state.k


@functools.lru_cache(maxsize=32)
def _blur_norm(taps_bytes, taps_shape, anchor, shape, iters, seed):
    taps = np.frombuffer(taps_bytes).reshape(taps_shape)
    K = BlurOperator(Filter(taps, anchor))
    return operator_norm(K.apply, K.T, shape, iters, seed)


@functools.lru_cache(maxsize=32)
def _analysis_norm(mode, dct_dilation, shape, iters, seed):
    from .framelet import dct_bank, dhf_bank

    A = AnalysisOperator(mode, dhf_bank(1), dct_bank(dct_dilation))
    return operator_norm(lambda x: A.apply(x), lambda s: A.adjoint(*s), shape, iters, seed)


def check_step_sizes(cfg, K, shape):
    """Return ``L = ||K||^2``; raise if ``gamma >= 2/L``."""
    taps = K.kernel.taps
    L = _blur_norm(taps.tobytes(), taps.shape, K.kernel.anchor, tuple(shape),
                   cfg.norm_iters, cfg.seed) ** 2
    # the Krylov estimate is a lower bound; pad it so gamma = 2/||K||^2 is rejected
    if cfg.gamma >= 2.0 / (L * (1.0 + NORM_MARGIN)):
        raise ConfigError(f"gamma = {cfg.gamma:g} must be < 2/||K||^2 = {2.0 / L:.6g}")
    return L


def effective_delta(cfg, A, shape):
    """Dual step with ``gamma * delta * ||A||^2 < 1``.

    The stacked operators of tntf, dhf-only and dct-only have norm at most 1;
    dhf+dct stacks two full tight frames and is rescaled by its estimated norm.
    """
    if A.mode != "dhf+dct":
        return cfg.delta
    norm = _analysis_norm(A.mode, A.dct.dilation, tuple(shape), cfg.norm_iters, cfg.seed)
    return cfg.delta / max(norm ** 2, 1.0)


def restore(z, cfg, K=None, callback=None):
    """Restore the observation ``z`` under ``cfg``.

    Weights are estimated from ``z`` at k = 0 and re-estimated on the adaptive
    schedule (from the sources named in ``cfg``) unless ``cfg.freeze_params``. Stops when the relative
    change of u drops below ``cfg.rel_tol`` or after ``cfg.max_iters`` steps.
    """
    z = np.asarray(z, dtype=np.float64)
    if not np.all(np.isfinite(z)):
        raise ValueError("observation contains non-finite values")
    K = K or BlurOperator()
    A = cfg.analysis_operator()
    L = check_step_sizes(cfg, K, z.shape)
    delta = effective_delta(cfg, A, z.shape)

    problem = RestorationProblem(z, K, A)
    problem.w1, problem.w2 = estimate_weights(problem, cfg, z)
    state = SolverState.initial(problem)
    current = [state]
    hook = _reweighter(problem, cfg, current)
    converged = False
    while state.k < cfg.max_iters:
        k = state.k
        state = pd3o_step(state, problem, cfg.gamma, delta, before_prox=hook)
        current[0] = state
        rec = state.history[-1]
        if callback is not None:
            callback(state.copy())
        if k % 30 == 0:
            log.info("k=%d objective=%.6e rel_change=%.3e step=%.3e", k, rec["objective"],
                     rec["rel_change"], rec["m_norm_step"])
        if rec["rel_change"] < cfg.rel_tol:
            converged = True
            break
    return RestorationResult(state.u.copy(), state.history, state, converged, delta, L)


def with_overrides(cfg, **kw):
    return replace(cfg, **kw)


HISTORY_COLUMNS = ("k", "objective", "rel_change", "m_norm_step")


def write_history_csv(history, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(HISTORY_COLUMNS)
        for rec in history:
            w.writerow([rec["k"]] + [repr(float(rec[c])) for c in HISTORY_COLUMNS[1:]])
