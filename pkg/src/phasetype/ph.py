r"""Phase-type distributions.

A phase-type law :math:`\mathrm{PH}(\alpha, S)` is the absorption time of a
Markov jump process with ``p`` transient states, initial distribution
``alpha`` and sub-intensity matrix ``S``. With exit vector ``s = -S e``:

.. math::

    f(y) = \alpha e^{S y} s, \qquad F(y) = 1 - \alpha e^{S y} e,
    \qquad E[Y^\theta] = \Gamma(1 + \theta)\, \alpha (-S)^{-\theta} e.
"""

import math

import numpy as np
from scipy.optimize import brentq

from .data import Sample
from .errors import DomainError, NumericError, ValidationError
from .linalg import kron_sum, lin_solve, mat_exp_scaled, mat_power_real

__all__ = [
    "STRUCTURES",
    "PhaseType",
    "ph_random",
    "ph_sum",
    "ph_min",
    "ph_max",
    "row_exp",
]

STRUCTURES = ("general", "hyperexponential", "gerlang", "coxian", "gcoxian")

_PROB_TOL = 1e-12
# Exit rates below this fraction of the row's total rate are rounding noise.
_EXIT_SNAP = 1e-13


def row_exp(alpha, S, t):
    """Rows ``alpha @ exp(S * t_i)`` for every entry of the 1-d array ``t``."""
    t = np.asarray(t, dtype=float)
    if S.shape[0] == 1:
        return alpha[None, :] * np.exp(S[0, 0] * t)[:, None]
    out = np.zeros((t.size, S.shape[0]))
    # exp(S t) -> 0 as t -> inf for a sub-intensity matrix
    finite = np.isfinite(t)
    if np.any(finite):
        E = mat_exp_scaled(S, t[finite])
        out[finite] = np.einsum("j,njk->nk", alpha, E)
    return out


def _scalar_or_array(values, like):
    if np.ndim(like) == 0:
        return float(values.reshape(()))
    return values


class PhaseType:
    """Phase-type distribution with representation ``(alpha, S)``.

    Instances are immutable once validated: ``alpha`` must be a probability
    vector, ``S`` a sub-intensity matrix with at least one positive exit rate.
    """

    def __init__(self, alpha, S):
        alpha = np.atleast_1d(np.asarray(alpha, dtype=float)).copy()
        S = np.atleast_2d(np.asarray(S, dtype=float)).copy()
        if alpha.ndim != 1 or S.ndim != 2 or S.shape != (alpha.size, alpha.size):
            raise ValidationError(f"dimension mismatch: alpha {alpha.shape}, S {S.shape}")
        if not (np.all(np.isfinite(alpha)) and np.all(np.isfinite(S))):
            raise ValidationError("parameters must be finite")
        if np.any(alpha < 0):
            raise ValidationError("alpha has negative entries")
        if abs(alpha.sum() - 1.0) > _PROB_TOL:
            raise ValidationError(f"alpha must sum to 1, sums to {alpha.sum()!r}")
        diag = np.diag(S)
        if np.any(diag >= 0):
            raise ValidationError("S must have strictly negative diagonal")
        off = S - np.diag(diag)
        if np.any(off < 0):
            raise ValidationError("S has negative off-diagonal entries")
        scale = np.abs(diag)
        exit_rates = -S.sum(axis=1)
        if np.any(exit_rates < -_EXIT_SNAP * scale):
            raise ValidationError("S has positive row sums")
        exit_rates[np.abs(exit_rates) <= _EXIT_SNAP * scale] = 0.0
        if not np.any(exit_rates > 0):
            raise ValidationError("exit vector is identically zero; absorption is impossible")

        for arr in (alpha, S, exit_rates):
            arr.setflags(write=False)
        self.alpha = alpha
        self.S = S
        self.exit = exit_rates

    @property
    def dimension(self):
        return self.alpha.size

    def __repr__(self):
        return f"PhaseType(alpha={self.alpha.tolist()}, S={self.S.tolist()})"

    def __eq__(self, other):
        if not isinstance(other, PhaseType):
            return NotImplemented
        return np.array_equal(self.alpha, other.alpha) and np.array_equal(self.S, other.S)

    __hash__ = None

    def __add__(self, other):
        if not isinstance(other, PhaseType):
            return NotImplemented
        return ph_sum(self, other)

    # -- functionals -----------------------------------------------------

    def _rows(self, x):
        return row_exp(self.alpha, self.S, np.ravel(x))

    def dens(self, x):
        """Density ``alpha exp(S x) s`` for ``x > 0``."""
        x = np.asarray(x, dtype=float)
        if np.any(~(x > 0)):
            raise DomainError("density is defined for x > 0 only")
        out = self._rows(x) @ self.exit
        return _scalar_or_array(np.maximum(out, 0.0).reshape(x.shape), x)

    def survival(self, x):
        """Survival function ``alpha exp(S x) e`` for ``x >= 0``."""
        x = np.asarray(x, dtype=float)
        if np.any(~(x >= 0)):
            raise DomainError("survival is defined for x >= 0 only")
        out = self._rows(x).sum(axis=1)
        return _scalar_or_array(np.clip(out, 0.0, 1.0).reshape(x.shape), x)

    def cdf(self, x):
        """Distribution function ``1 - alpha exp(S x) e`` for ``x >= 0``."""
        x = np.asarray(x, dtype=float)
        return _scalar_or_array(1.0 - np.asarray(self.survival(x)), x)

    def haz(self, x):
        """Hazard rate ``f(x) / (1 - F(x))``."""
        x = np.asarray(x, dtype=float)
        if np.any(~(x > 0)):
            raise DomainError("hazard is defined for x > 0 only")
        rows = self._rows(x)
        surv = rows.sum(axis=1)
        if np.any(surv <= 1e-300):
            raise NumericError("survival underflows; hazard is not representable")
        return _scalar_or_array((rows @ self.exit / surv).reshape(x.shape), x)

    def quantile(self, prob):
        """Smallest ``x`` with ``F(x) >= prob``, by bracketing root search."""
        prob = np.asarray(prob, dtype=float)
        if np.any(~((prob > 0) & (prob < 1))):
            raise DomainError("quantile probabilities must lie in (0, 1)")
        out = np.array([_invert_cdf(self.cdf, q, lower=0.0) for q in prob.ravel()])
        return _scalar_or_array(out.reshape(prob.shape), prob)

    def moment(self, theta):
        """Fractional moment ``Gamma(1+theta) alpha (-S)^(-theta) e``."""
        theta = float(theta)
        if not theta > 0:
            raise DomainError("moment order must be positive")
        ones = np.ones(self.dimension)
        if theta == int(theta):
            v = ones
            for _ in range(int(theta)):
                v = lin_solve(-self.S, v)
        else:
            v = mat_power_real(-self.S, -theta) @ ones
        return math.gamma(1.0 + theta) * float(self.alpha @ v)

    def mean(self):
        return self.moment(1)

    def loglik(self, sample):
        """Weighted log-likelihood; censored points contribute log-survival."""
        if not isinstance(sample, Sample):
            sample = Sample(sample)
        sample.require_positive()
        ll = 0.0
        if sample.obs.size:
            f = self._rows(sample.obs) @ self.exit
            with np.errstate(divide="ignore"):
                ll += float(sample.obs_weights @ np.log(f))
        if sample.rcens.size:
            surv = self._rows(sample.rcens).sum(axis=1)
            with np.errstate(divide="ignore"):
                ll += float(sample.rcens_weights @ np.log(surv))
        return ll

    def minimum(self, other):
        return ph_min(self, other)

    def maximum(self, other):
        return ph_max(self, other)

    # -- structure -------------------------------------------------------

    def zero_pattern(self):
        """Boolean masks ``(alpha == 0, S == 0)``."""
        return self.alpha == 0, self.S == 0


def _invert_cdf(cdf, prob, lower, upper=1.0):
    """Root of ``cdf(x) = prob`` on ``(lower, inf)``; grows the bracket by doubling."""
    width = upper - lower
    while cdf(lower + width) < prob:
        width *= 2.0
        if not np.isfinite(lower + width) or width > 2.0**1023:
            raise NumericError(f"could not bracket quantile for prob={prob}")
    hi = lower + width
    lo = lower if width == upper - lower else lower + width / 2.0
    x = brentq(lambda t: cdf(t) - prob, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    return x


def ph_random(structure="general", dimension=3, seed=None):
    """Random phase-type law with the zero pattern of a preset structure.

    Free rates are drawn i.i.d. uniform on (0, 1) and each diagonal entry is
    minus the total outflow of its row. Free initial probabilities are drawn
    uniform on (0, 1) and normalized. ``seed`` may be an integer or a
    :class:`numpy.random.Generator`.
    """
    if structure not in STRUCTURES:
        raise ValidationError(f"unknown structure {structure!r}; expected one of {STRUCTURES}")
    p = int(dimension)
    if p < 1:
        raise ValidationError("dimension must be at least 1")
    rng = np.random.default_rng(seed)

    def draw(size):
        # open interval keeps every free rate strictly positive
        return 1.0 - rng.random(size)

    off = np.zeros((p, p))
    exit_rates = np.zeros(p)
    alpha = np.zeros(p)

    if structure == "general":
        off = draw((p, p))
        np.fill_diagonal(off, 0.0)
        exit_rates = draw(p)
        alpha = draw(p)
    elif structure == "hyperexponential":
        exit_rates = draw(p)
        alpha = draw(p)
    else:
        idx = np.arange(p - 1)
        off[idx, idx + 1] = draw(p - 1)
        if structure == "gerlang":
            exit_rates[p - 1] = draw(1)[0]
        else:
            exit_rates = draw(p)
        if structure == "gcoxian":
            alpha = draw(p)
        else:
            alpha[0] = 1.0

    alpha = alpha / alpha.sum()
    S = off - np.diag(off.sum(axis=1) + exit_rates)
    return PhaseType(alpha, S)


def ph_sum(a, b):
    """Law of ``Y1 + Y2`` for independent ``Y1 ~ a``, ``Y2 ~ b``."""
    p1, p2 = a.dimension, b.dimension
    alpha = np.concatenate([a.alpha, np.zeros(p2)])
    S = np.zeros((p1 + p2, p1 + p2))
    S[:p1, :p1] = a.S
    S[:p1, p1:] = np.outer(a.exit, b.alpha)
    S[p1:, p1:] = b.S
    return PhaseType(alpha, S)


def ph_min(a, b):
    """Law of ``min(Y1, Y2)``: ``PH(alpha1 (x) alpha2, S1 (+) S2)``."""
    return PhaseType(np.kron(a.alpha, b.alpha), kron_sum(a.S, b.S))


def ph_max(a, b):
    """Law of ``max(Y1, Y2)`` for independent ``Y1 ~ a``, ``Y2 ~ b``.

    The chain runs both components jointly until one is absorbed and then
    continues in the survivor's own phases.
    """
    p1, p2 = a.dimension, b.dimension
    q = p1 * p2
    n = q + p1 + p2
    alpha = np.zeros(n)
    alpha[:q] = np.kron(a.alpha, b.alpha)
    S = np.zeros((n, n))
    S[:q, :q] = kron_sum(a.S, b.S)
    S[:q, q : q + p1] = np.kron(np.eye(p1), b.exit[:, None])
    S[:q, q + p1 :] = np.kron(a.exit[:, None], np.eye(p2))
    S[q : q + p1, q : q + p1] = a.S
    S[q + p1 :, q + p1 :] = b.S
    return PhaseType(alpha, S)
