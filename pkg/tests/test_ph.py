import math

import numpy as np
import pytest
from scipy import integrate, stats
from scipy.optimize import bisect

from phasetype import (
    STRUCTURES,
    DomainError,
    NumericError,
    PhaseType,
    Sample,
    ValidationError,
    ph_max,
    ph_min,
    ph_random,
    ph_sum,
)

GRID = np.linspace(0.05, 6.0, 50)


def assert_valid(ph):
    # re-running the constructor re-checks every invariant
    PhaseType(ph.alpha, ph.S)


class TestConstruction:
    def test_exponential(self):
        ph = PhaseType([1.0], [[-2.0]])
        assert ph.dimension == 1
        np.testing.assert_array_equal(ph.exit, [2.0])

    def test_hyperexponential(self):
        ph = PhaseType([0.5, 0.5], [[-1.0, 0.0], [0.0, -3.0]])
        np.testing.assert_array_equal(ph.exit, [1.0, 3.0])

    @pytest.mark.parametrize(
        "alpha, S, match",
        [
            ([0.5, 0.6], [[-1.0, 0.0], [0.0, -1.0]], "sum to 1"),
            ([-0.5, 1.5], [[-1.0, 0.0], [0.0, -1.0]], "negative"),
            ([1.0], [[1.0]], "diagonal"),
            ([1.0, 0.0], [[-1.0, -0.5], [0.0, -1.0]], "off-diagonal"),
            ([1.0, 0.0], [[-1.0, 2.0], [0.0, -1.0]], "row sums"),
            ([1.0, 0.0], [[-1.0, 1.0], [1.0, -1.0]], "exit vector"),
            ([1.0], [[-1.0, 0.0], [0.0, -1.0]], "mismatch"),
            ([1.0], [[np.inf]], "finite"),
        ],
    )
    def test_invalid(self, alpha, S, match):
        with pytest.raises(ValidationError, match=match):
            PhaseType(alpha, S)

    def test_immutable(self, expo2):
        with pytest.raises(ValueError):
            expo2.S[0, 0] = -5.0


class TestRandom:
    def test_gerlang_pattern(self):
        ph = ph_random("gerlang", 3, seed=11)
        np.testing.assert_array_equal(ph.alpha, [1.0, 0.0, 0.0])
        S = ph.S
        assert np.all(S[np.tril_indices(3, -1)] == 0)
        assert S[0, 2] == 0
        np.testing.assert_array_equal(S.sum(axis=1)[:2], [0.0, 0.0])
        assert S[0, 1] == -S[0, 0] and S[1, 2] == -S[1, 1]

    def test_hyperexponential_diagonal(self):
        S = ph_random("hyperexponential", 4, seed=3).S
        assert np.count_nonzero(S - np.diag(np.diag(S))) == 0

    def test_deterministic(self):
        a, b = ph_random("general", 5, seed=42), ph_random("general", 5, seed=42)
        assert a == b
        assert a != ph_random("general", 5, seed=43)

    @pytest.mark.parametrize("structure", STRUCTURES)
    @pytest.mark.parametrize("p", [1, 2, 5])
    def test_zero_pattern_matches_preset(self, structure, p):
        ph = ph_random(structure, p, seed=p)
        off = ph.S - np.diag(np.diag(ph.S))
        upper = np.zeros((p, p), dtype=bool)
        upper[np.arange(p - 1), np.arange(1, p)] = True
        if structure == "general":
            allowed_off = ~np.eye(p, dtype=bool)
        elif structure == "hyperexponential":
            allowed_off = np.zeros((p, p), dtype=bool)
        else:
            allowed_off = upper
        assert np.array_equal(off != 0, allowed_off)
        if structure in ("gerlang", "coxian"):
            assert np.array_equal(ph.alpha != 0, np.arange(p) == 0)
        else:
            assert np.all(ph.alpha > 0)
        if structure == "gerlang":
            assert np.array_equal(ph.exit != 0, np.arange(p) == p - 1)
        else:
            assert np.all(ph.exit > 0)

    def test_bad_arguments(self):
        with pytest.raises(ValidationError):
            ph_random("coxian", 0)
        with pytest.raises(ValidationError):
            ph_random("erlang", 2)


class TestFunctionals:
    def test_exponential_density_and_cdf(self, expo2):
        assert expo2.dens(1.0) == pytest.approx(2 * math.exp(-2), rel=1e-14)
        assert expo2.cdf(1.0) == pytest.approx(1 - math.exp(-2), rel=1e-14)

    def test_erlang_density(self, erlang2):
        assert erlang2.dens(2.0) == pytest.approx(2 * math.exp(-2), rel=1e-13)

    def test_density_domain(self, expo2):
        with pytest.raises(DomainError):
            expo2.dens(0.0)
        with pytest.raises(DomainError):
            expo2.dens([1.0, -1.0])

    def test_vectorized_shapes(self, erlang2):
        x = np.linspace(0.1, 3, 6).reshape(2, 3)
        assert erlang2.dens(x).shape == (2, 3)
        assert erlang2.cdf(x).shape == (2, 3)
        assert isinstance(erlang2.cdf(1.0), float)

    @pytest.mark.parametrize("seed", range(4))
    def test_density_integrates_to_one(self, seed):
        ph = ph_random("general", 4, seed=seed)
        total, _ = integrate.quad(ph.dens, 0, np.inf, epsabs=1e-12, epsrel=1e-12, limit=200)
        assert total == pytest.approx(1.0, abs=1e-6)

    def test_cdf_near_zero(self):
        for seed in range(5):
            assert ph_random("gcoxian", 3, seed=seed).cdf(1e-14) <= 1e-10

    @pytest.mark.parametrize("seed", range(3))
    def test_cdf_matches_quadrature(self, seed):
        ph = ph_random("coxian", 3, seed=seed)
        for x in (0.3, 1.0, 4.0):
            val, _ = integrate.quad(ph.dens, 0, x, epsabs=1e-13, epsrel=1e-13)
            assert ph.cdf(x) == pytest.approx(val, abs=1e-7)

    def test_cdf_monotone_density_nonnegative(self):
        ph = ph_random("general", 5, seed=9)
        x = np.linspace(0.01, 40, 400)
        assert np.all(np.diff(ph.cdf(x)) >= 0)
        assert np.all(ph.dens(x) >= 0)

    def test_quantile_exponential(self):
        ph = PhaseType([1.0], [[-1.0]])
        assert ph.quantile(1 - math.exp(-1)) == pytest.approx(1.0, abs=1e-8)

    def test_quantile_inverse_identity(self):
        ph = ph_random("general", 4, seed=2)
        x = np.linspace(0.1, 8, 15)
        np.testing.assert_allclose(ph.quantile(ph.cdf(x)), x, atol=1e-6)
        q = ph.quantile(np.array([0.01, 0.5, 0.99]))
        np.testing.assert_allclose(ph.cdf(q), [0.01, 0.5, 0.99], atol=1e-10)

    def test_quantile_erlang_against_closed_form(self, erlang2):
        closed = bisect(lambda x: 1 - math.exp(-x) * (1 + x) - 0.5, 0, 10, xtol=1e-14)
        assert erlang2.quantile(0.5) == pytest.approx(closed, abs=1e-8)

    def test_quantile_domain(self, expo2):
        with pytest.raises(DomainError):
            expo2.quantile(1.0)

    def test_hazard_exponential(self, expo2):
        np.testing.assert_allclose(expo2.haz(np.array([0.1, 1.0, 10.0])), 2.0, atol=1e-10)

    def test_hazard_hyperexponential_nonincreasing(self):
        ph = ph_random("hyperexponential", 3, seed=5)
        h = ph.haz(np.linspace(0.01, 20, 200))
        assert np.all(np.diff(h) <= 1e-12)

    def test_hazard_identity(self):
        ph = ph_random("general", 3, seed=8)
        x = np.linspace(0.1, 5, 20)
        np.testing.assert_allclose(ph.haz(x) * (1 - ph.cdf(x)), ph.dens(x), atol=1e-12)

    def test_hazard_overflow(self, expo2):
        with pytest.raises(NumericError):
            expo2.haz(400.0)

    def test_moments_closed_form(self, expo2, erlang2):
        assert expo2.moment(1) == pytest.approx(0.5, rel=1e-14)
        assert erlang2.moment(2) == pytest.approx(6.0, rel=1e-13)

    def test_fractional_moment_quadrature(self):
        ph = ph_random("general", 3, seed=4)
        val, _ = integrate.quad(lambda x: x**1.5 * ph.dens(x), 0, np.inf, epsabs=1e-13, epsrel=1e-12, limit=200)
        assert ph.moment(1.5) == pytest.approx(val, rel=1e-5)

    def test_moment_of_defective_matrix_fails(self, erlang2):
        with pytest.raises(NumericError):
            erlang2.moment(0.5)


class TestClosure:
    def test_sum_of_exponentials_is_erlang(self):
        e1 = PhaseType([1.0], [[-1.0]])
        s = e1 + e1
        assert s.dens(2.0) == pytest.approx(2 * math.exp(-2), rel=1e-13)

    def test_sum_matches_convolution(self):
        a, b = ph_random("general", 2, seed=1), ph_random("coxian", 3, seed=2)
        s = ph_sum(a, b)
        assert_valid(s)
        for x in (0.5, 2.0, 5.0):
            conv, _ = integrate.quad(lambda u: a.dens(u) * b.cdf(x - u), 0, x, epsabs=1e-13, epsrel=1e-13)
            assert s.cdf(x) == pytest.approx(conv, abs=1e-6)

    def test_min_of_exponentials(self):
        m = ph_min(PhaseType([1.0], [[-1.0]]), PhaseType([1.0], [[-2.0]]))
        np.testing.assert_array_equal(m.S, [[-3.0]])

    def test_min_survival_product(self):
        a, b = ph_random("general", 3, seed=3), ph_random("gcoxian", 2, seed=4)
        m = ph_min(a, b)
        assert m.dimension == 6
        np.testing.assert_allclose(m.survival(GRID), a.survival(GRID) * b.survival(GRID), atol=1e-10)

    def test_max_cdf_product(self):
        a, b = ph_random("hyperexponential", 2, seed=5), ph_random("general", 3, seed=6)
        m = ph_max(a, b)
        assert m.dimension == 2 * 3 + 2 + 3
        assert_valid(m)
        np.testing.assert_allclose(m.cdf(GRID), a.cdf(GRID) * b.cdf(GRID), atol=1e-10)

    def test_max_of_unit_exponentials(self):
        e1 = PhaseType([1.0], [[-1.0]])
        m = e1.maximum(e1)
        x = math.log(2.0) + math.log(1 + math.sqrt(0.5))  # arbitrary point
        assert m.cdf(x) == pytest.approx((1 - math.exp(-x)) ** 2, abs=1e-12)
        med = m.quantile(0.5)
        assert (1 - math.exp(-med)) ** 2 == pytest.approx(0.5, abs=1e-10)


class TestLogLik:
    def test_single_point(self):
        assert PhaseType([1.0], [[-1.0]]).loglik(Sample([1.0])) == pytest.approx(-1.0, rel=1e-14)

    def test_weight_equals_duplicate(self):
        ph = ph_random("general", 3, seed=1)
        a = ph.loglik(Sample([0.7, 1.3], [2.0, 1.0]))
        b = ph.loglik(Sample([0.7, 0.7, 1.3]))
        assert a == pytest.approx(b, rel=1e-14)

    def test_direct_summation(self, rng):
        ph = ph_random("general", 3, seed=7)
        y = rng.exponential(2.0, 50)
        direct = sum(math.log(ph.dens(v)) for v in y)
        assert ph.loglik(Sample(y)) == pytest.approx(direct, abs=1e-12 * abs(direct))

    def test_censored_term(self):
        ph = PhaseType([1.0], [[-1.5]])
        ll = ph.loglik(Sample([1.0], rcens=[2.0], rcens_weights=[3.0]))
        assert ll == pytest.approx(math.log(1.5) - 1.5 - 3 * 1.5 * 2.0, rel=1e-14)

    def test_against_scipy_gamma(self, rng):
        y = rng.gamma(2.0, 1.0, 30)
        erlang = PhaseType([1.0, 0.0], [[-1.0, 1.0], [0.0, -1.0]])
        assert erlang.loglik(Sample(y)) == pytest.approx(stats.gamma(2.0).logpdf(y).sum(), rel=1e-12)
