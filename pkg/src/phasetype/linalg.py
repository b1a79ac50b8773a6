"""Dense matrix primitives: exponential, real powers, solves and Kronecker algebra.

All functions take and return plain ``numpy`` arrays and never modify their
inputs.
"""

import numpy as np
from numba import njit

from .errors import NumericError, ValidationError

__all__ = [
    "mat_exp",
    "mat_exp_scaled",
    "mat_power_real",
    "kron_product",
    "kron_sum",
    "lin_solve",
    "POWER_COND_CAP",
]

#: Largest eigenvector-basis condition number accepted by :func:`mat_power_real`.
POWER_COND_CAP = 1e12

# Numerator coefficients of the [13/13] Pade approximant of exp.
_PADE13 = (
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
)

# Scaled matrices satisfy ||A / 2^k||_1 <= _SCALE_TARGET.
_SCALE_TARGET = 0.5


@njit(cache=True)
def _solve_one(M, X):
    # Gaussian elimination without pivoting, in place; only applied to Pade
    # denominators, which are strictly diagonally dominant after scaling.
    p = M.shape[0]
    for c in range(p):
        piv = M[c, c]
        for r in range(c + 1, p):
            f = M[r, c] / piv
            if f != 0.0:
                for j in range(c, p):
                    M[r, j] -= f * M[c, j]
                for j in range(p):
                    X[r, j] -= f * X[c, j]
    for c in range(p - 1, -1, -1):
        piv = M[c, c]
        for j in range(p):
            acc = X[c, j]
            for m in range(c + 1, p):
                acc -= M[c, m] * X[m, j]
            X[c, j] = acc / piv


@njit(cache=True)
def _square_one(R, k, T):
    p = R.shape[0]
    for _ in range(k):
        for i in range(p):
            for j in range(p):
                acc = 0.0
                for m in range(p):
                    acc += R[i, m] * R[m, j]
                T[i, j] = acc
        R[:, :] = T


@njit(cache=True)
def _solve_and_square(A, B, k):
    # R[b] = (A[b]^-1 B[b])^(2^k[b])
    n, p, _ = A.shape
    R = B.copy()
    M = np.empty((p, p))
    T = np.empty((p, p))
    for b in range(n):
        M[:, :] = A[b]
        _solve_one(M, R[b])
        _square_one(R[b], k[b], T)
    return R


@njit(cache=True)
def _pade_from_powers(powers, coef, z, k):
    # exp(z_b * P_1) squared k_b times, where powers[j] = P_1^j
    n = z.size
    p = powers.shape[1]
    R = np.empty((n, p, p))
    M = np.empty((p, p))
    T = np.empty((p, p))
    for b in range(n):
        M[:, :] = 0.0
        X = R[b]
        X[:, :] = 0.0
        w = 1.0
        for j in range(14):
            cw = coef[j] * w
            sign = 1.0 if j % 2 == 0 else -1.0
            for r in range(p):
                for c in range(p):
                    X[r, c] += cw * powers[j, r, c]
                    M[r, c] += sign * cw * powers[j, r, c]
            w *= z[b]
        _solve_one(M, X)
        _square_one(X, k[b], T)
    return R


def _as_finite(A, name="A"):
    A = np.asarray(A, dtype=float)
    if not np.all(np.isfinite(A)):
        raise ValidationError(f"{name} contains non-finite entries")
    return A


def _as_square(A, name="A"):
    A = _as_finite(A, name)
    if A.ndim < 2 or A.shape[-1] != A.shape[-2] or A.shape[-1] < 1:
        raise ValidationError(f"{name} must be a non-empty square matrix, got shape {A.shape}")
    return A


def mat_exp(A):
    """Matrix exponential by degree-13 Pade approximation with scaling and squaring.

    ``A`` may be a single ``(p, p)`` matrix or a stack of shape ``(..., p, p)``;
    every matrix in a stack gets its own scaling exponent.

    Examples
    --------
    >>> mat_exp([[0.0, 1.0], [0.0, 0.0]])
    array([[1., 1.],
           [0., 1.]])
    """
    A = _as_square(A)
    p = A.shape[-1]
    if p == 1:
        return np.exp(A)

    batch_shape = A.shape[:-2]
    X = A.reshape((-1, p, p))
    norms = np.abs(X).sum(axis=1).max(axis=1)
    with np.errstate(divide="ignore"):
        k = np.ceil(np.log2(norms / _SCALE_TARGET))
    k = np.where(norms > _SCALE_TARGET, k, 0.0).astype(int)
    X = np.ldexp(X, -k[:, None, None])

    b = _PADE13
    ident = np.broadcast_to(np.eye(p), X.shape)
    X2 = X @ X
    X4 = X2 @ X2
    X6 = X4 @ X2
    U = X @ (X6 @ (b[13] * X6 + b[11] * X4 + b[9] * X2) + b[7] * X6 + b[5] * X4 + b[3] * X2 + b[1] * ident)
    V = X6 @ (b[12] * X6 + b[10] * X4 + b[8] * X2) + b[6] * X6 + b[4] * X4 + b[2] * X2 + b[0] * ident
    R = _solve_and_square(np.ascontiguousarray(V - U), np.ascontiguousarray(V + U), k.astype(np.int64))

    if not np.all(np.isfinite(R)):
        raise NumericError("matrix exponential overflowed")
    return R.reshape(batch_shape + (p, p))


def mat_exp_scaled(S, t):
    """Stack ``exp(S * t_i)`` for one square ``S`` and a 1-d array of scalars ``t``.

    Uses the same Pade approximant and scaling rule as :func:`mat_exp`. Every
    scaled matrix is a multiple of ``S``, so the approximant's numerator and
    denominator are built from powers of ``S`` computed once.
    """
    S = _as_square(S, "S")
    if S.ndim != 2:
        raise ValidationError("mat_exp_scaled expects a single matrix")
    t = _as_finite(np.ravel(t), "t")
    p = S.shape[0]
    c = np.abs(S).sum(axis=0).max()
    if c == 0.0 or t.size == 0:
        return np.broadcast_to(np.eye(p), (t.size, p, p)).copy()

    powers = np.empty((14, p, p))
    powers[0] = np.eye(p)
    unit = S / c
    for j in range(1, 14):
        powers[j] = powers[j - 1] @ unit
    norms = np.abs(t) * c
    with np.errstate(divide="ignore"):
        k = np.ceil(np.log2(norms / _SCALE_TARGET))
    k = np.where(norms > _SCALE_TARGET, k, 0.0).astype(int)
    z = np.ldexp(t * c, -k)
    R = _pade_from_powers(powers, np.asarray(_PADE13), z, k.astype(np.int64))
    if not np.all(np.isfinite(R)):
        raise NumericError("matrix exponential overflowed")
    return R


def lin_solve(A, b):
    """Solve ``A x = b`` for a vector or matrix right-hand side."""
    A = _as_square(A)
    b = _as_finite(b, "b")
    if b.shape[0] != A.shape[0]:
        raise ValidationError(f"shape mismatch: A is {A.shape}, b is {b.shape}")
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > 1.0 / np.finfo(float).eps:
        raise NumericError(f"matrix is singular to working precision (condition {cond:.3g})")
    return np.linalg.solve(A, b)


def mat_power_real(A, theta, cond_cap=POWER_COND_CAP):
    """Real power ``A**theta`` of a square matrix.

    Integer exponents use repeated multiplication (negative ones a solve
    against the identity first). Other exponents go through an
    eigendecomposition ``V diag(lambda**theta) V^-1`` and therefore need a
    diagonalizable ``A`` whose eigenvalues avoid the closed negative real axis.
    """
    A = _as_square(A)
    if A.ndim != 2:
        raise ValidationError("mat_power_real expects a single matrix")
    theta = float(theta)
    if not np.isfinite(theta):
        raise ValidationError("theta must be finite")
    p = A.shape[0]

    if theta == int(theta) and abs(theta) < 2**31:
        n = int(theta)
        if n >= 0:
            return np.linalg.matrix_power(A, n)
        return np.linalg.matrix_power(lin_solve(A, np.eye(p)), -n)

    lam, vecs = np.linalg.eig(A)
    cond = np.linalg.cond(vecs)
    if not np.isfinite(cond) or cond > cond_cap:
        raise NumericError(f"eigenbasis is ill-conditioned (condition estimate {cond:.3g}); matrix may be defective")
    on_cut = (np.abs(lam.imag) <= 1e-14 * np.maximum(1.0, np.abs(lam))) & (lam.real <= 0)
    if np.any(on_cut):
        raise NumericError("non-integer power of a matrix with eigenvalues on the non-positive real axis")
    powered = (vecs * lam.astype(complex) ** theta) @ np.linalg.inv(vecs)
    resid = np.abs(powered.imag).max()
    if resid > 1e-9:
        raise NumericError(f"matrix power has imaginary residue {resid:.3g}")
    return powered.real


def kron_product(A, B):
    """Kronecker product of two square matrices."""
    return np.kron(_as_square(A, "A"), _as_square(B, "B"))


def kron_sum(A, B):
    """Kronecker sum ``A (x) I + I (x) B``."""
    A = _as_square(A, "A")
    B = _as_square(B, "B")
    return np.kron(A, np.eye(B.shape[0])) + np.kron(np.eye(A.shape[0]), B)
