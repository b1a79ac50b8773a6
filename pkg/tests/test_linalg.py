import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from phasetype import NumericError, ValidationError, kron_product, kron_sum, lin_solve, mat_exp, mat_power_real
from phasetype.linalg import mat_exp_scaled


def taylor_exp(A, terms=60):
    out = np.eye(A.shape[0])
    term = np.eye(A.shape[0])
    for n in range(1, terms):
        term = term @ A / n
        out = out + term
    return out


def random_subintensity(rng, p):
    S = rng.uniform(0, 1, (p, p)) * (rng.uniform(size=(p, p)) < 0.6)
    np.fill_diagonal(S, 0.0)
    exit_rates = rng.uniform(0, 1, p)
    np.fill_diagonal(S, -(S.sum(axis=1) + exit_rates))
    return S


def test_exp_of_zero_is_identity():
    np.testing.assert_allclose(mat_exp(np.zeros((3, 3))), np.eye(3), rtol=0, atol=1e-15)


def test_exp_nilpotent():
    np.testing.assert_allclose(mat_exp([[0.0, 1.0], [0.0, 0.0]]), [[1.0, 1.0], [0.0, 1.0]], atol=1e-15)


def test_exp_matches_taylor_series(rng):
    for _ in range(20):
        A = rng.uniform(-1, 1, (4, 4))
        expected = taylor_exp(A)
        rel = np.abs(mat_exp(A) - expected).max() / np.abs(expected).max()
        assert rel <= 1e-12


def test_exp_batched_matches_single(rng):
    A = rng.uniform(-3, 3, (7, 3, 3)) * rng.uniform(0.1, 20, (7, 1, 1))
    batched = mat_exp(A)
    for a, e in zip(A, batched):
        np.testing.assert_allclose(e, mat_exp(a), rtol=1e-14, atol=0)


def test_exp_rejects_nonfinite():
    with pytest.raises(ValidationError):
        mat_exp([[np.nan, 0.0], [0.0, 1.0]])


def test_exp_of_subintensity_is_substochastic(rng):
    for _ in range(200):
        p = int(rng.integers(1, 7))
        E = mat_exp(random_subintensity(rng, p) * rng.uniform(0, 30))
        assert E.min() >= 0.0
        assert E.sum(axis=1).max() <= 1 + 1e-12


def test_exp_inverse_identity(rng):
    for _ in range(50):
        A = rng.uniform(-1, 1, (4, 4))
        A *= rng.uniform(0, 5) / np.linalg.norm(A, 2)
        np.testing.assert_allclose(mat_exp(A) @ mat_exp(-A), np.eye(4), atol=1e-9)


def test_power_identity_and_diagonal():
    np.testing.assert_allclose(mat_power_real(np.eye(3), 0.5), np.eye(3), atol=1e-15)
    np.testing.assert_allclose(mat_power_real(np.diag([4.0, 9.0]), 0.5), np.diag([2.0, 3.0]), atol=1e-14)


def test_power_integer_matches_product(rng):
    M = rng.normal(size=(3, 3))
    A = M @ M.T + 3 * np.eye(3)
    rel = np.abs(mat_power_real(A, 2) - A @ A).max() / np.abs(A @ A).max()
    assert rel <= 1e-10
    # non-integer path squared
    half = mat_power_real(A, 0.5)
    np.testing.assert_allclose(half @ half, A, rtol=1e-10)


def test_power_one_is_identity_map(rng):
    A = rng.uniform(-1, 1, (5, 5))
    np.testing.assert_allclose(mat_power_real(A, 1), A, atol=1e-12)


def test_power_negative_integer(rng):
    A = rng.uniform(-1, 1, (3, 3)) + 4 * np.eye(3)
    np.testing.assert_allclose(mat_power_real(A, -2) @ A @ A, np.eye(3), atol=1e-12)


def test_power_defective_raises():
    jordan = np.array([[2.0, 1.0], [0.0, 2.0]])
    with pytest.raises(NumericError, match="condition"):
        mat_power_real(jordan, 0.5)


def test_power_negative_eigenvalue_raises():
    with pytest.raises(NumericError):
        mat_power_real(np.diag([-1.0, 2.0]), 0.5)


def test_kron_product_identity_block():
    B = np.array([[1.0, 2.0], [3.0, 4.0]])
    expected = np.zeros((4, 4))
    expected[:2, :2] = B
    expected[2:, 2:] = B
    np.testing.assert_array_equal(kron_product(np.eye(2), B), expected)


def test_kron_sum_scalar():
    np.testing.assert_array_equal(kron_sum([[-1.0]], [[-2.0]]), [[-3.0]])


def brute_kron_sum(A, B):
    n, m = A.shape[0], B.shape[0]
    out = np.zeros((n * m, n * m))
    for i in range(n):
        for j in range(m):
            for k in range(n):
                for l in range(m):
                    out[i * m + j, k * m + l] = A[i, k] * (j == l) + (i == k) * B[j, l]
    return out


def test_kron_sum_brute_force(rng):
    for _ in range(10):
        A, B = rng.normal(size=(2, 2)), rng.normal(size=(2, 2))
        np.testing.assert_allclose(kron_sum(A, B), brute_kron_sum(A, B), atol=1e-15)


@settings(max_examples=60, deadline=None)
@given(
    arrays(np.float64, (2, 2), elements=st.floats(-3, 3)),
    arrays(np.float64, (3, 3), elements=st.floats(-3, 3)),
)
def test_kron_sum_spectrum(A, B):
    # keep eigenvalues separated so the comparison is well conditioned
    A = A + np.diag([0.0, 7.0])
    B = B + np.diag([0.0, 20.0, 40.0])
    got = np.sort_complex(np.linalg.eigvals(kron_sum(A, B)))
    pairs = np.add.outer(np.linalg.eigvals(A), np.linalg.eigvals(B)).ravel()
    np.testing.assert_allclose(got, np.sort_complex(pairs), atol=1e-8)


def test_lin_solve_examples(rng):
    np.testing.assert_allclose(lin_solve(np.eye(3), [1.0, 2.0, 3.0]), [1.0, 2.0, 3.0])
    np.testing.assert_allclose(lin_solve(np.diag([2.0, 4.0]), [2.0, 4.0]), [1.0, 1.0])
    A = rng.normal(size=(5, 5)) + 5 * np.eye(5)
    b = rng.normal(size=5)
    x = lin_solve(A, b)
    assert np.linalg.norm(A @ x - b) <= 1e-10 * np.linalg.norm(b)


def test_lin_solve_singular():
    with pytest.raises(NumericError):
        lin_solve([[1.0, 2.0], [2.0, 4.0]], [1.0, 1.0])


def test_scaling_exponent_rule():
    # ||A||_1 = 40 needs 7 halvings to reach 0.5; the result must still be accurate
    A = np.array([[-40.0, 0.0], [0.0, -1.0]])
    np.testing.assert_allclose(np.diag(mat_exp(A)), [math.exp(-40), math.exp(-1)], rtol=1e-13)


def test_exp_huge_norm_decays():
    # scaling exponents beyond the float exponent range must not collapse to I
    S = np.array([[-1.0, 0.5], [0.2, -0.7]])
    np.testing.assert_array_equal(mat_exp(S * 1e300), np.zeros((2, 2)))
    np.testing.assert_array_equal(mat_exp_scaled(S, [1e300])[0], np.zeros((2, 2)))


def test_exp_scaled_matches_stack(rng):
    S = random_subintensity(rng, 4)
    t = np.concatenate([[0.0, 1e-9], rng.exponential(5.0, 30)])
    np.testing.assert_allclose(mat_exp_scaled(S, t), mat_exp(S[None] * t[:, None, None]), rtol=1e-12, atol=1e-15)
