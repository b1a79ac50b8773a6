"""Random variate generation by simulating the underlying Markov jump process.

Randomness comes from :class:`numpy.random.Generator` with the PCG64 bit
generator. An integer seed always produces the same stream. Draws are
consumed in a fixed order:

1. one uniform per path, in path order, to pick the initial state;
2. then, for every round while some path is still transient: one standard
   exponential per live path (sojourn), followed by one uniform per live path
   (next state), live paths taken in increasing path index.

The next state is found by inverse CDF over the row
``(s_k1, ..., s_kp, s_k) / -s_kk`` scanned in index order with the absorbing
state last; the first index whose cumulative probability exceeds the uniform
wins, so zero-probability states are never selected.
"""

import numpy as np

from .errors import ValidationError
from .iph import GEV, GEV_XI_ZERO, InhomPhaseType
from .ph import PhaseType

__all__ = ["make_rng", "sim_ph", "sim_iph", "sim_mgev"]


def make_rng(seed=None):
    """A PCG64-backed generator; generators pass through unchanged."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


def _count(n):
    n = int(n)
    if n < 1:
        raise ValidationError("sample size must be at least 1")
    return n


def _cumulative(probs):
    cum = np.cumsum(probs, axis=-1)
    cum[..., -1] = 1.0
    return cum


def sim_ph(ph, n, seed=None, return_jumps=False):
    """Absorption times of ``n`` independent paths of the chain behind ``ph``.

    With ``return_jumps=True`` also returns the number of jumps per path
    (the final one being the jump into the absorbing state).
    """
    if not isinstance(ph, PhaseType):
        raise ValidationError("sim_ph expects a PhaseType")
    n = _count(n)
    rng = make_rng(seed)
    p = ph.dimension
    rates = -np.diag(ph.S)
    jump = np.zeros((p, p + 1))
    jump[:, :p] = ph.S / rates[:, None]
    jump[np.arange(p), np.arange(p)] = 0.0
    jump[:, p] = ph.exit / rates
    jump_cum = _cumulative(jump)
    start_cum = _cumulative(ph.alpha)

    state = np.searchsorted(start_cum, rng.random(n), side="right")
    times = np.zeros(n)
    jumps = np.zeros(n, dtype=np.int64)
    live = np.arange(n)
    while live.size:
        cur = state[live]
        times[live] += rng.standard_exponential(live.size) / rates[cur]
        u = rng.random(live.size)
        nxt = (jump_cum[cur] <= u[:, None]).sum(axis=1)
        jumps[live] += 1
        state[live] = nxt
        live = live[nxt < p]

    if return_jumps:
        return times, jumps
    return times


def sim_mgev(base, mu, sigma, xi, n, seed=None):
    """Matrix-GEV variates ``mu + sigma (Y^-xi - 1) / xi`` with ``Y ~ base``.

    ``|xi| < 1e-10`` uses the Gumbel branch ``mu - sigma log Y``.
    """
    transform = GEV(float(mu), float(sigma), float(xi))
    y = sim_ph(base, n, seed)
    logy = np.log(y)
    if abs(transform.xi) < GEV_XI_ZERO:
        return transform.mu - transform.sigma * logy
    return transform.mu + transform.sigma * np.expm1(-transform.xi * logy) / transform.xi


def sim_iph(iph, n, seed=None):
    """Variates ``g(Y)`` for an inhomogeneous phase-type law."""
    if not isinstance(iph, InhomPhaseType):
        raise ValidationError("sim_iph expects an InhomPhaseType")
    t = iph.transform
    if isinstance(t, GEV):
        return sim_mgev(iph.base, t.mu, t.sigma, t.xi, n, seed)
    return t._g(sim_ph(iph.base, n, seed))
