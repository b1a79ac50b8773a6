"""Maximum-likelihood fitting of PH and IPH laws by the EM algorithm.

The E-step integrates, with classical fourth-order Runge-Kutta, the linear ODE
system for

* ``a(y) = alpha exp(S y)``,
* ``b(y) = exp(S y) s`` and ``b~(y) = exp(S y) e``,
* ``C(y) = int_0^y exp(S (y - u)) s a(u) du`` (column ``k`` is the
  convolution term for state ``k``) and ``D(y)``, the same with ``e`` in
  place of ``s``,

from ``y = 0`` across the sorted distinct sample points. Exact observations
use ``(b, C)`` and right-censored points use ``(b~, D)``.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .data import Sample
from .errors import NumericError, UnsupportedError, ValidationError
from .iph import GEV, InhomPhaseType, Pareto, iph_loglik, make_transform
from .optimize import nelder_mead
from .ph import PhaseType

__all__ = [
    "SufficientStats",
    "EmOptions",
    "FitReport",
    "default_step_length",
    "merge_points",
    "e_step",
    "m_step",
    "fit_ph",
    "fit_iph",
    "beta_objective",
    "tail_index",
]


@dataclass(frozen=True)
class SufficientStats:
    """Conditional expectations of starts ``B``, occupation times ``Z``,
    transitions ``N`` (off-diagonal) and exits ``Nexit``."""

    B: np.ndarray
    Z: np.ndarray
    N: np.ndarray
    Nexit: np.ndarray


@dataclass(frozen=True)
class EmOptions:
    steps: int = 1000
    rk_step: float = None
    beta_depth: int = 10
    print_every: int = 100

    def __post_init__(self):
        if int(self.steps) < 1:
            raise ValidationError("steps must be at least 1")
        if self.rk_step is not None and not self.rk_step > 0:
            raise ValidationError("rk_step must be positive")
        if int(self.beta_depth) < 1 or int(self.print_every) < 1:
            raise ValidationError("beta_depth and print_every must be positive")


@dataclass
class FitReport:
    model: object
    loglik_trace: np.ndarray
    iterations_run: int
    trace_iterations: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))

    @property
    def loglik(self):
        return float(self.loglik_trace[-1])


def default_step_length(S):
    """Runge-Kutta step ``0.1 / max_i |s_ii|``."""
    S = np.asarray(S, dtype=float)
    return 0.1 / np.max(np.abs(np.diag(S)))


def merge_points(sample):
    """Sorted distinct values with their summed exact and censored weights."""
    values = np.concatenate([sample.obs, sample.rcens])
    points, inverse = np.unique(values, return_inverse=True)
    n_obs = sample.obs.size
    w_obs = np.bincount(inverse[:n_obs], weights=sample.obs_weights, minlength=points.size)
    w_cens = np.bincount(inverse[n_obs:], weights=sample.rcens_weights, minlength=points.size)
    return points, w_obs.astype(float), w_cens.astype(float)


_TINY, _HUGE = 1e-150, 1e150


@njit(cache=True)
def _deriv(X, S, ex, p, cens, out):
    # layout: a | b | b~ | C | D   (C, D row-major p x p)
    ia, ib, ibt, ic = 0, p, 2 * p, 3 * p
    idd = 3 * p + p * p
    for j in range(p):
        acc_a = 0.0
        acc_b = 0.0
        acc_bt = 0.0
        for m in range(p):
            acc_a += X[ia + m] * S[m, j]
            acc_b += S[j, m] * X[ib + m]
            if cens:
                acc_bt += S[j, m] * X[ibt + m]
        out[ia + j] = acc_a
        out[ib + j] = acc_b
        out[ibt + j] = acc_bt
    for l in range(p):
        for k in range(p):
            acc_c = 0.0
            acc_d = 0.0
            for m in range(p):
                acc_c += S[l, m] * X[ic + m * p + k]
                if cens:
                    acc_d += S[l, m] * X[idd + m * p + k]
            out[ic + l * p + k] = acc_c + ex[l] * X[ia + k]
            out[idd + l * p + k] = acc_d + X[ia + k] if cens else 0.0


@njit(cache=True)
def _group_scale(X, lo, hi):
    m = 0.0
    for j in range(lo, hi):
        m = max(m, abs(X[j]))
    if m > 0.0 and (m < _TINY or m > _HUGE):
        return 1.0 / m
    return 1.0


@njit(cache=True)
def _rescale(X, p, cens):
    # The system is linear: (a, C, D), b and b~ can each be rescaled freely
    # because every statistic is a ratio within one group. This keeps long
    # gaps between sample points from underflowing.
    c = _group_scale(X, 0, p)
    if c != 1.0:
        for j in range(p):
            X[j] *= c
        for j in range(3 * p, X.size):
            X[j] *= c
    c = _group_scale(X, p, 2 * p)
    if c != 1.0:
        for j in range(p, 2 * p):
            X[j] *= c
    if cens:
        c = _group_scale(X, 2 * p, 3 * p)
        if c != 1.0:
            for j in range(2 * p, 3 * p):
                X[j] *= c


@njit(cache=True)
def _rk_sweep(alpha, S, ex, points, w_obs, w_cens, h, cens):
    p = alpha.size
    n = 3 * p + 2 * p * p
    X = np.zeros(n)
    X[:p] = alpha
    X[p : 2 * p] = ex
    X[2 * p : 3 * p] = 1.0
    k1 = np.empty(n)
    k2 = np.empty(n)
    k3 = np.empty(n)
    k4 = np.empty(n)
    tmp = np.empty(n)
    B = np.zeros(p)
    Z = np.zeros(p)
    N = np.zeros((p, p))
    Nexit = np.zeros(p)
    ic = 3 * p
    idd = 3 * p + p * p

    y = 0.0
    for i in range(points.size):
        dt = points[i] - y
        if dt > 0.0:
            m = max(1, int(math.ceil(dt / h)))
            hh = dt / m
            for _ in range(m):
                _deriv(X, S, ex, p, cens, k1)
                for j in range(n):
                    tmp[j] = X[j] + 0.5 * hh * k1[j]
                _deriv(tmp, S, ex, p, cens, k2)
                for j in range(n):
                    tmp[j] = X[j] + 0.5 * hh * k2[j]
                _deriv(tmp, S, ex, p, cens, k3)
                for j in range(n):
                    tmp[j] = X[j] + hh * k3[j]
                _deriv(tmp, S, ex, p, cens, k4)
                for j in range(n):
                    X[j] += hh / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])
                _rescale(X, p, cens)
        y = points[i]

        w = w_obs[i]
        if w > 0.0:
            fb = 0.0
            fa = 0.0
            for k in range(p):
                fb += alpha[k] * X[p + k]
                fa += X[k] * ex[k]
            if not (fb > 0.0 and fa > 0.0 and np.isfinite(fb) and np.isfinite(fa)):
                return B, Z, N, Nexit, i
            for k in range(p):
                B[k] += w * alpha[k] * X[p + k] / fb
                Z[k] += w * X[ic + k * p + k] / fa
                Nexit[k] += w * ex[k] * X[k] / fa
                for l in range(p):
                    if l != k:
                        N[k, l] += w * S[k, l] * X[ic + l * p + k] / fa

        w = w_cens[i]
        if w > 0.0:
            sb = 0.0
            sa = 0.0
            for k in range(p):
                sb += alpha[k] * X[2 * p + k]
                sa += X[k]
            if not (sb > 0.0 and sa > 0.0 and np.isfinite(sb) and np.isfinite(sa)):
                return B, Z, N, Nexit, i
            for k in range(p):
                B[k] += w * alpha[k] * X[2 * p + k] / sb
                Z[k] += w * X[idd + k * p + k] / sa
                for l in range(p):
                    if l != k:
                        N[k, l] += w * S[k, l] * X[idd + l * p + k] / sa
    return B, Z, N, Nexit, -1


def _e_step_merged(ph, points, w_obs, w_cens, h):
    cens = bool(np.any(w_cens > 0))
    B, Z, N, Nexit, bad = _rk_sweep(
        np.ascontiguousarray(ph.alpha),
        np.ascontiguousarray(ph.S),
        np.ascontiguousarray(ph.exit),
        points,
        w_obs,
        w_cens,
        float(h),
        cens,
    )
    if bad >= 0:
        raise NumericError(f"E-step produced a non-positive or non-finite likelihood at sample point {float(points[bad])!r}")
    return SufficientStats(B, Z, N, Nexit)


def e_step(ph, sample, h=None):
    """Conditional sufficient statistics of ``sample`` under ``ph``.

    ``h`` defaults to :func:`default_step_length` of ``ph.S``. The sample is
    sorted and merged into weighted distinct points internally.
    """
    if not isinstance(sample, Sample):
        sample = Sample(sample)
    sample.require_positive()
    if h is None:
        h = default_step_length(ph.S)
    points, w_obs, w_cens = merge_points(sample)
    return _e_step_merged(ph, points, w_obs, w_cens, h)


def m_step(stats, total_weight, previous=None):
    """Maximize the complete-data likelihood given conditional statistics.

    A state with zero expected occupation keeps its previous row of ``S``
    (``previous`` must then be given); all other zero statistics map to
    zero rates, so zeros in ``alpha`` and ``S`` are preserved.
    """
    B, Z, N, Nexit = (np.asarray(v, dtype=float) for v in (stats.B, stats.Z, stats.N, stats.Nexit))
    p = B.size
    alpha = B / float(total_weight)
    S = np.zeros((p, p))
    for k in range(p):
        if Z[k] > 0:
            row = N[k] / Z[k]
            row[k] = 0.0
            exit_k = Nexit[k] / Z[k]
        elif previous is not None:
            row = previous.S[k].copy()
            row[k] = 0.0
            exit_k = previous.exit[k]
        else:
            raise NumericError(f"state {k} has zero expected occupation and no previous rates to keep")
        S[k] = row
        S[k, k] = -(row.sum() + exit_k)
    return PhaseType(alpha, S)


def _check_fit_sample(sample):
    if not isinstance(sample, Sample):
        sample = Sample(sample)
    return sample.require_nonempty()


def fit_ph(init, sample, opts=None, callback=None):
    """Run ``opts.steps`` EM iterations from ``init``.

    The log-likelihood (exact, censored terms included) is recorded every
    ``opts.print_every`` iterations and at the last one; ``callback(iteration,
    loglik, model)`` is invoked at each recording.
    """
    opts = opts or EmOptions()
    sample = _check_fit_sample(sample).require_positive()
    if not isinstance(init, PhaseType):
        raise ValidationError("fit_ph expects a PhaseType initial model")
    points, w_obs, w_cens = merge_points(sample)
    total = sample.total_weight

    ph = init
    trace, iters = [], []
    for it in range(1, int(opts.steps) + 1):
        h = opts.rk_step if opts.rk_step is not None else default_step_length(ph.S)
        stats = _e_step_merged(ph, points, w_obs, w_cens, h)
        ph = m_step(stats, total, previous=ph)
        if it % opts.print_every == 0 or it == opts.steps:
            ll = ph.loglik(sample)
            trace.append(ll)
            iters.append(it)
            if callback is not None:
                callback(it, ll, ph)
    return FitReport(ph, np.array(trace), int(opts.steps), np.array(iters, dtype=int))


def beta_objective(family, alpha, S, beta, sample):
    """IPH log-likelihood of ``sample`` as a function of the transform parameters."""
    name = family if isinstance(family, str) else family.name
    try:
        transform = make_transform(name, beta)
    except ValidationError:
        return -np.inf
    return iph_loglik(transform, alpha, S, sample)


def fit_iph(init, sample, opts=None, callback=None):
    """EM for inhomogeneous phase-type laws.

    Each iteration maps the data to the phase-type scale with the current
    transform, performs one E/M cycle for ``(alpha, S)`` and then improves
    the transform parameters with at most ``opts.beta_depth`` Nelder-Mead
    iterations on the IPH log-likelihood, never accepting a worse value.
    Parameters are searched on an unconstrained scale (logarithms of positive
    parameters, ``gamma - 1`` on log scale for lognormal).
    """
    opts = opts or EmOptions()
    sample = _check_fit_sample(sample)
    if not isinstance(init, InhomPhaseType):
        raise ValidationError("fit_iph expects an InhomPhaseType initial model")
    transform = init.transform
    cls = type(transform)
    if isinstance(transform, GEV):
        if sample.has_censoring:
            raise UnsupportedError("matrix-GEV fitting does not support right-censored data")
    else:
        sample.require_positive()
    if not (np.all(transform.in_support(sample.obs)) and np.all(transform.in_support(sample.rcens))):
        raise ValidationError("sample lies outside the support of the initial transform")
    total = sample.total_weight

    def objective(u, alpha, S):
        try:
            cand = cls.from_unconstrained(u)
        except ValidationError:
            return -np.inf
        return iph_loglik(cand, alpha, S, sample)

    ph = init.base
    u = transform.to_unconstrained()
    trace, iters = [], []
    for it in range(1, int(opts.steps) + 1):
        mapped = sample.map(transform._g_inv)
        points, w_obs, w_cens = merge_points(mapped)
        h = opts.rk_step if opts.rk_step is not None else default_step_length(ph.S)
        stats = _e_step_merged(ph, points, w_obs, w_cens, h)
        ph = m_step(stats, total, previous=ph)

        u, ll = nelder_mead(lambda v: objective(v, ph.alpha, ph.S), u, max_iter=opts.beta_depth)
        transform = cls.from_unconstrained(u)
        if it % opts.print_every == 0 or it == opts.steps:
            trace.append(ll)
            iters.append(it)
            if callback is not None:
                callback(it, ll, InhomPhaseType(ph, transform))
    return FitReport(InhomPhaseType(ph, transform), np.array(trace), int(opts.steps), np.array(iters, dtype=int))


def tail_index(model):
    """Pareto-type tail index ``-1 / max Re(eig(S))`` of a matrix-Pareto law."""
    if isinstance(model, InhomPhaseType):
        if not isinstance(model.transform, Pareto):
            raise UnsupportedError("tail index is defined for matrix-Pareto models")
        S = model.base.S
    elif isinstance(model, PhaseType):
        S = model.S
    else:
        S = np.asarray(model, dtype=float)
    lead = np.max(np.linalg.eigvals(S).real)
    return -1.0 / lead
