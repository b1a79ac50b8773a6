"""Derivative-free maximization."""

import numpy as np

from .errors import NumericError

__all__ = ["nelder_mead"]

# reflection, expansion, contraction, shrink
_RHO, _CHI, _GAMMA, _SIGMA = 1.0, 2.0, 0.5, 0.5


def nelder_mead(objective, x0, max_iter=200, tol=1e-10, step=0.1):
    """Maximize ``objective`` with the Nelder-Mead simplex method.

    The initial simplex is ``x0`` plus ``x0 + step * e_i`` for each axis.
    Non-finite objective values away from ``x0`` count as ``-inf``. Since
    ``x0`` is a vertex and the best vertex is never discarded, the returned
    point is never worse than the start.

    Returns ``(x_best, f_best)``.
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    f0 = float(objective(x0))
    if not np.isfinite(f0):
        raise NumericError(f"objective is not finite at the starting point: {f0}")

    def fun(x):
        val = float(objective(x))
        return val if np.isfinite(val) else -np.inf

    n = x0.size
    simplex = np.vstack([x0, x0 + step * np.eye(n)])
    values = np.array([f0] + [fun(v) for v in simplex[1:]])

    for _ in range(int(max_iter)):
        order = np.argsort(-values, kind="stable")
        simplex, values = simplex[order], values[order]
        if values[0] - values[-1] <= tol and np.max(np.abs(simplex[1:] - simplex[0])) <= tol:
            break
        centroid = simplex[:-1].mean(axis=0)
        worst = simplex[-1]

        xr = centroid + _RHO * (centroid - worst)
        fr = fun(xr)
        if fr > values[0]:
            xe = centroid + _CHI * (xr - centroid)
            fe = fun(xe)
            simplex[-1], values[-1] = (xe, fe) if fe > fr else (xr, fr)
            continue
        if fr > values[-2]:
            simplex[-1], values[-1] = xr, fr
            continue

        if fr > values[-1]:
            xc = centroid + _GAMMA * (xr - centroid)
            fc = fun(xc)
            accept = fc >= fr
        else:
            xc = centroid + _GAMMA * (worst - centroid)
            fc = fun(xc)
            accept = fc > values[-1]
        if accept:
            simplex[-1], values[-1] = xc, fc
            continue

        best = simplex[0]
        for i in range(1, n + 1):
            simplex[i] = best + _SIGMA * (simplex[i] - best)
            values[i] = fun(simplex[i])

    i = int(np.argmax(values))
    return simplex[i].copy(), float(values[i])
