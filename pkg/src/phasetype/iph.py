r"""Inhomogeneous phase-type distributions ``X = g(Y)`` with ``Y ~ PH(alpha, S)``.

Each transform family carries its own closed forms for ``g``, its inverse
``g^{-1}(x) = \int_0^x \lambda(t) dt`` and the intensity ``\lambda``, so the
density ``\lambda(x) \alpha \exp(S g^{-1}(x)) s`` and survival
``\alpha \exp(S g^{-1}(x)) e`` need no numerical integration. Matrix-GEV has
no intensity representation: its ``g`` is decreasing, so its distribution
function is the survival of the underlying phase-type variable.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericError, UnsupportedError, ValidationError
from .data import Sample
from .ph import PhaseType, _invert_cdf, _scalar_or_array, ph_max, ph_min, row_exp

__all__ = [
    "FAMILIES",
    "Transform",
    "Pareto",
    "Weibull",
    "Lognormal",
    "Loglogistic",
    "Gompertz",
    "GEV",
    "make_transform",
    "InhomPhaseType",
    "iph_loglik",
    "iph_min",
    "iph_max",
]

# |xi| below this uses the Gumbel (xi = 0) formulas.
GEV_XI_ZERO = 1e-10


@dataclass(frozen=True)
class Transform:
    """Base class of the inhomogeneity families.

    Subclasses implement ``g``, ``g_inv`` and ``intensity`` (the derivative of
    ``g_inv`` in absolute value) on arrays, plus the map between their
    parameters and an unconstrained vector used by the fitting routines.
    """

    name = "base"
    increasing = True

    @property
    def params(self):
        raise NotImplementedError

    def support(self):
        """Open interval ``(lo, hi)`` where densities are defined."""
        return 0.0, np.inf

    def in_support(self, x):
        lo, hi = self.support()
        x = np.asarray(x, dtype=float)
        return (x > lo) & (x < hi)

    def check_support(self, x):
        if not np.all(self.in_support(x)):
            lo, hi = self.support()
            raise DomainError(f"{self.name} values must lie in ({lo}, {hi})")

    def g_fun(self, y):
        y = np.asarray(y, dtype=float)
        if np.any(~(y >= 0)):
            raise DomainError("g is defined on y >= 0")
        return _scalar_or_array(np.asarray(self._g(y)), y)

    def g_inv(self, x):
        x = np.asarray(x, dtype=float)
        self.check_support(x)
        return _scalar_or_array(np.asarray(self._g_inv(x)), x)

    def to_unconstrained(self):
        return np.log(np.asarray(self.params, dtype=float))

    @classmethod
    def from_unconstrained(cls, u):
        return cls(*np.exp(np.asarray(u, dtype=float)).tolist())

    def log_intensity(self, x):
        return np.log(self._intensity(x))


@dataclass(frozen=True)
class Pareto(Transform):
    """``g(y) = beta (e^y - 1)``; intensity ``1 / (t + beta)``."""

    beta: float = 1.0
    name = "pareto"

    def __post_init__(self):
        _positive(self.beta, "beta")

    @property
    def params(self):
        return (self.beta,)

    def _g(self, y):
        return self.beta * np.expm1(y)

    def _g_inv(self, x):
        return np.log1p(x / self.beta)

    def _intensity(self, x):
        return 1.0 / (x + self.beta)


@dataclass(frozen=True)
class Weibull(Transform):
    """``g(y) = y^(1/beta)``; intensity ``beta t^(beta - 1)``."""

    beta: float = 1.0
    name = "weibull"

    def __post_init__(self):
        _positive(self.beta, "beta")

    @property
    def params(self):
        return (self.beta,)

    def _g(self, y):
        return y ** (1.0 / self.beta)

    def _g_inv(self, x):
        return x**self.beta

    def _intensity(self, x):
        return self.beta * x ** (self.beta - 1.0)


@dataclass(frozen=True)
class Lognormal(Transform):
    """``g(y) = exp(y^(1/gamma)) - 1``; requires ``gamma > 1``."""

    gamma: float = 2.0
    name = "lognormal"

    def __post_init__(self):
        if not (np.isfinite(self.gamma) and self.gamma > 1):
            raise ValidationError(f"lognormal gamma must exceed 1, got {self.gamma!r}")

    @property
    def params(self):
        return (self.gamma,)

    def _g(self, y):
        return np.expm1(y ** (1.0 / self.gamma))

    def _g_inv(self, x):
        return np.log1p(x) ** self.gamma

    def _intensity(self, x):
        return self.gamma * np.log1p(x) ** (self.gamma - 1.0) / (x + 1.0)

    def to_unconstrained(self):
        return np.log([self.gamma - 1.0])

    @classmethod
    def from_unconstrained(cls, u):
        return cls(1.0 + float(np.exp(u[0])))


@dataclass(frozen=True)
class Loglogistic(Transform):
    """``g(y) = gamma (e^y - 1)^(1/theta)``; intensity ``theta t^(theta-1) / (t^theta + gamma^theta)``."""

    gamma: float = 1.0
    theta: float = 1.0
    name = "loglogistic"

    def __post_init__(self):
        _positive(self.gamma, "gamma")
        _positive(self.theta, "theta")

    @property
    def params(self):
        return (self.gamma, self.theta)

    def _g(self, y):
        return self.gamma * np.expm1(y) ** (1.0 / self.theta)

    def _g_inv(self, x):
        return np.log1p((x / self.gamma) ** self.theta)

    def _intensity(self, x):
        return self.theta * x ** (self.theta - 1.0) / (x**self.theta + self.gamma**self.theta)

    def log_intensity(self, x):
        # stable for large x/gamma
        r = x / self.gamma
        return np.log(self.theta) - np.log(x) + self.theta * np.log(r) - np.log1p(r**self.theta)


@dataclass(frozen=True)
class Gompertz(Transform):
    """``g(y) = log(beta y + 1) / beta``; intensity ``exp(beta t)``."""

    beta: float = 1.0
    name = "gompertz"

    def __post_init__(self):
        _positive(self.beta, "beta")

    @property
    def params(self):
        return (self.beta,)

    def _g(self, y):
        return np.log1p(self.beta * y) / self.beta

    def _g_inv(self, x):
        return np.expm1(self.beta * x) / self.beta

    def _intensity(self, x):
        return np.exp(self.beta * x)

    def log_intensity(self, x):
        return self.beta * x


@dataclass(frozen=True)
class GEV(Transform):
    """``g(y) = mu + sigma (y^(-xi) - 1) / xi`` (``mu - sigma log y`` at ``xi = 0``).

    ``g`` is decreasing, so ``F_X(x) = P(Y >= g^{-1}(x))``.
    """

    mu: float = 0.0
    sigma: float = 1.0
    xi: float = 0.0
    name = "gev"
    increasing = False

    def __post_init__(self):
        if not np.isfinite(self.mu):
            raise ValidationError("gev mu must be finite")
        _positive(self.sigma, "sigma")
        if not np.isfinite(self.xi):
            raise ValidationError("gev xi must be finite")

    @property
    def params(self):
        return (self.mu, self.sigma, self.xi)

    @property
    def gumbel(self):
        return abs(self.xi) < GEV_XI_ZERO

    def support(self):
        if self.gumbel:
            return -np.inf, np.inf
        edge = self.mu - self.sigma / self.xi
        return (edge, np.inf) if self.xi > 0 else (-np.inf, edge)

    def g_fun(self, y):
        y = np.asarray(y, dtype=float)
        if np.any(~(y > 0)):
            raise DomainError("gev g is defined on y > 0")
        return _scalar_or_array(np.asarray(self._g(y)), y)

    def _g(self, y):
        if self.gumbel:
            return self.mu - self.sigma * np.log(y)
        return self.mu + self.sigma * np.expm1(-self.xi * np.log(y)) / self.xi

    def _g_inv(self, x):
        z = (x - self.mu) / self.sigma
        if self.gumbel:
            return np.exp(-z)
        return np.exp(-np.log1p(self.xi * z) / self.xi)

    def _intensity(self, x):
        return np.exp(self.log_intensity(x))

    def log_intensity(self, x):
        # |d g_inv / dx| = g_inv(x)^(1 + xi) / sigma
        z = (x - self.mu) / self.sigma
        if self.gumbel:
            return -z - np.log(self.sigma)
        return -(1.0 + self.xi) / self.xi * np.log1p(self.xi * z) - np.log(self.sigma)

    def to_unconstrained(self):
        return np.array([self.mu, np.log(self.sigma), self.xi])

    @classmethod
    def from_unconstrained(cls, u):
        return cls(float(u[0]), float(np.exp(u[1])), float(u[2]))


def _positive(value, name):
    if not (np.isfinite(value) and value > 0):
        raise ValidationError(f"{name} must be positive and finite, got {value!r}")


FAMILIES = {cls.name: cls for cls in (Pareto, Weibull, Lognormal, Loglogistic, Gompertz, GEV)}


def make_transform(name, params=None):
    """Build a transform from its family name and an optional parameter list."""
    try:
        cls = FAMILIES[name]
    except KeyError:
        raise ValidationError(f"unknown transform {name!r}; expected one of {sorted(FAMILIES)}") from None
    if params is None:
        return cls()
    params = [float(v) for v in np.atleast_1d(params)]
    expected = len(cls().params)
    if len(params) != expected:
        raise ValidationError(f"{name} takes {expected} parameter(s), got {len(params)}")
    return cls(*params)


class InhomPhaseType:
    """Inhomogeneous phase-type law: a :class:`PhaseType` base and a transform."""

    def __init__(self, base, transform):
        if not isinstance(base, PhaseType):
            raise ValidationError("base must be a PhaseType")
        if not isinstance(transform, Transform):
            raise ValidationError("transform must be a Transform")
        self.base = base
        self.transform = transform

    def __repr__(self):
        return f"InhomPhaseType({self.base!r}, {self.transform!r})"

    def __eq__(self, other):
        if not isinstance(other, InhomPhaseType):
            return NotImplemented
        return self.base == other.base and self.transform == other.transform

    __hash__ = None

    @property
    def alpha(self):
        return self.base.alpha

    @property
    def S(self):
        return self.base.S

    def _rows(self, x):
        with np.errstate(over="ignore"):
            t = self.transform._g_inv(np.ravel(x))
        return row_exp(self.base.alpha, self.base.S, t)

    def dens(self, x):
        """Density ``lambda(x) alpha exp(S g^{-1}(x)) s`` on the family's support."""
        x = np.asarray(x, dtype=float)
        self.transform.check_support(x)
        flat = np.ravel(x)
        core = np.maximum(self._rows(flat) @ self.base.exit, 0.0)
        with np.errstate(over="ignore", invalid="ignore"):
            # the intensity may overflow where the matrix exponential has already vanished
            out = np.where(core > 0, core * self.transform._intensity(flat), 0.0)
        return _scalar_or_array(out.reshape(x.shape), x)

    def _tail(self, x):
        """``alpha exp(S g^{-1}(x)) e`` with the limits 0 / 1 outside the support."""
        flat = np.ravel(np.asarray(x, dtype=float))
        lo, hi = self.transform.support()
        inside = self.transform.in_support(flat)
        # P(Y > g^{-1}(x)) tends to 1 at the lower edge for increasing g
        left = 1.0 if self.transform.increasing else 0.0
        out = np.where(flat >= hi, 1.0 - left, left)
        if np.any(inside):
            out[inside] = self._rows(flat[inside]).sum(axis=1)
        return np.clip(out, 0.0, 1.0)

    def survival(self, x):
        x = np.asarray(x, dtype=float)
        tail = self._tail(x)
        out = tail if self.transform.increasing else 1.0 - tail
        return _scalar_or_array(out.reshape(x.shape), x)

    def cdf(self, x):
        """Distribution function; 0 left of the support and 1 right of it."""
        x = np.asarray(x, dtype=float)
        tail = self._tail(x)
        out = 1.0 - tail if self.transform.increasing else tail
        return _scalar_or_array(out.reshape(x.shape), x)

    def haz(self, x):
        x = np.asarray(x, dtype=float)
        surv = np.asarray(self.survival(x))
        if np.any(surv <= 1e-300):
            raise NumericError("survival underflows; hazard is not representable")
        return _scalar_or_array(np.asarray(self.dens(x)) / surv, x)

    def quantile(self, prob):
        """Quantile by root search on the distribution function.

        Matrix-GEV maps the base quantile through its decreasing ``g`` since
        its support may be unbounded below.
        """
        prob = np.asarray(prob, dtype=float)
        if np.any(~((prob > 0) & (prob < 1))):
            raise DomainError("quantile probabilities must lie in (0, 1)")
        flat = prob.ravel()
        if self.transform.increasing:
            out = np.array([_invert_cdf(self.cdf, q, lower=0.0) for q in flat])
        else:
            out = self.transform._g(np.atleast_1d(self.base.quantile(1.0 - flat)))
        return _scalar_or_array(np.asarray(out).reshape(prob.shape), prob)

    def quantile_via_base(self, prob):
        """Quantile ``g(Q_Y(prob))`` through the base law (increasing ``g`` only)."""
        prob = np.asarray(prob, dtype=float)
        q = prob if self.transform.increasing else 1.0 - prob
        return self.transform.g_fun(self.base.quantile(q))

    def loglik(self, sample):
        """Weighted log-likelihood with log-survival terms for censored points."""
        return iph_loglik(self.transform, self.base.alpha, self.base.S, sample)

    def moment(self, theta):
        """Moment of the underlying phase-type variable."""
        return self.base.moment(theta)


def iph_loglik(transform, alpha, S, sample):
    """Log-likelihood of ``IPH(alpha, S, transform)``; ``-inf`` if any value leaves the support."""
    if not isinstance(sample, Sample):
        sample = Sample(sample)
    alpha = np.asarray(alpha, dtype=float)
    S = np.asarray(S, dtype=float)
    exit_rates = -S.sum(axis=1)
    if sample.rcens.size and not transform.increasing:
        raise UnsupportedError("right-censored data cannot be used with a decreasing transform")
    if not (np.all(transform.in_support(sample.obs)) and np.all(transform.in_support(sample.rcens))):
        return -np.inf
    ll = 0.0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if sample.obs.size:
            t = transform._g_inv(sample.obs)
            f = row_exp(alpha, S, t) @ exit_rates
            ll += float(sample.obs_weights @ (np.log(f) + transform.log_intensity(sample.obs)))
        if sample.rcens.size:
            t = transform._g_inv(sample.rcens)
            ll += float(sample.rcens_weights @ np.log(row_exp(alpha, S, t).sum(axis=1)))
    return ll if np.isfinite(ll) or ll == -np.inf else -np.inf


def _check_same_transform(a, b):
    if a.transform != b.transform:
        raise UnsupportedError(f"transforms differ: {a.transform!r} vs {b.transform!r}")


def iph_min(a, b):
    """Minimum of two independent IPH variables sharing one transform."""
    _check_same_transform(a, b)
    # a decreasing g turns the minimum of X into the maximum of Y
    base = ph_min(a.base, b.base) if a.transform.increasing else ph_max(a.base, b.base)
    return InhomPhaseType(base, a.transform)


def iph_max(a, b):
    """Maximum of two independent IPH variables sharing one transform."""
    _check_same_transform(a, b)
    base = ph_max(a.base, b.base) if a.transform.increasing else ph_min(a.base, b.base)
    return InhomPhaseType(base, a.transform)
