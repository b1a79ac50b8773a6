"""Weighted, possibly right-censored samples."""

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

__all__ = ["Sample"]


def _vector(values, name):
    arr = np.atleast_1d(np.asarray(values, dtype=float)).ravel()
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite values")
    return arr


def _weights(weights, n, name):
    if weights is None:
        return np.ones(n)
    w = _vector(weights, name)
    if w.shape != (n,):
        raise ValidationError(f"{name} has length {w.size}, expected {n}")
    if np.any(w <= 0):
        raise ValidationError(f"{name} must be strictly positive")
    return w


@dataclass(frozen=True, eq=False)
class Sample:
    """Exact observations and right-censoring points, each with positive weights.

    Missing weights default to one. Values are only required to be finite
    here; positivity is checked by the consumers that need it, since
    matrix-GEV data may live on the whole real line.
    """

    obs: np.ndarray
    obs_weights: np.ndarray = None
    rcens: np.ndarray = field(default_factory=lambda: np.empty(0))
    rcens_weights: np.ndarray = None

    def __post_init__(self):
        obs = _vector(self.obs, "obs")
        rcens = _vector(self.rcens if self.rcens is not None else [], "rcens")
        object.__setattr__(self, "obs", obs)
        object.__setattr__(self, "rcens", rcens)
        object.__setattr__(self, "obs_weights", _weights(self.obs_weights, obs.size, "obs_weights"))
        object.__setattr__(self, "rcens_weights", _weights(self.rcens_weights, rcens.size, "rcens_weights"))
        for arr in (self.obs, self.obs_weights, self.rcens, self.rcens_weights):
            arr.setflags(write=False)

    @property
    def total_weight(self):
        return float(self.obs_weights.sum() + self.rcens_weights.sum())

    @property
    def has_censoring(self):
        return self.rcens.size > 0

    def require_positive(self):
        if np.any(self.obs <= 0) or np.any(self.rcens <= 0):
            raise ValidationError("sample values must be strictly positive")
        return self

    def require_nonempty(self):
        if self.obs.size == 0:
            raise ValidationError("sample has no exact observations")
        return self

    def map(self, fn):
        """Apply ``fn`` to every value, keeping weights."""
        return Sample(fn(self.obs), self.obs_weights, fn(self.rcens), self.rcens_weights)
