"""Core binomial/Poisson primitives against exact and independent oracles."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.special import logsumexp
from scipy.stats import binom as scipy_binom

from prophetcomp.binom import (
    BinomialLaw,
    SelectionInstance,
    binom_pmf_log,
    binom_shortfall,
    g_cumulative,
    g_kernel,
    poisson_min_expectation,
    q_deriv,
    q_second_deriv,
    q_value,
)


class TestSelectionInstance:
    def test_valid(self):
        inst = SelectionInstance(m=5, n=4, k=2)
        assert inst.threshold_quantile == 0.5

    @pytest.mark.parametrize("m,n,k", [(0, 1, 1), (1, 0, 1), (1, 1, 0), (2, 3, 3), (1, 5, 2)])
    def test_invalid(self, m, n, k):
        with pytest.raises(ValueError):
            SelectionInstance(m=m, n=n, k=k)


class TestPmfLog:
    def test_symmetric_fair_case(self):
        assert binom_pmf_log(BinomialLaw(2, 0.5), 1) == pytest.approx(math.log(0.5), rel=1e-15)

    def test_degenerate_laws(self):
        assert binom_pmf_log(BinomialLaw(5, 0.0), 0) == 0.0
        assert binom_pmf_log(BinomialLaw(5, 0.0), 3) == -math.inf
        assert binom_pmf_log(BinomialLaw(5, 1.0), 5) == 0.0
        assert binom_pmf_log(BinomialLaw(5, 1.0), 2) == -math.inf

    def test_small_success_probability(self):
        import mpmath

        want = float(1000 * mpmath.log(mpmath.mpf("0.999")))
        assert binom_pmf_log(BinomialLaw(1000, 0.001), 0) == pytest.approx(want, rel=1e-14)

    def test_matches_exact_rationals(self):
        # Relative error floor for a log-space representation is ulp(|log p|),
        # so the 1e-14 bound applies where the pmf is not absurdly tiny.
        for trials in (1, 2, 5, 17, 40):
            for p in (0.5, 0.1, 0.9, 3 / 7):
                pf = Fraction(p)
                for ell in range(trials + 1):
                    exact = Fraction(math.comb(trials, ell)) * pf**ell * (1 - pf) ** (trials - ell)
                    if exact == 0 or exact < Fraction(1, 10**20):
                        continue
                    got = math.exp(binom_pmf_log(BinomialLaw(trials, p), ell))
                    assert got == pytest.approx(float(exact), rel=1e-14)

    def test_out_of_range_index(self):
        with pytest.raises(ValueError):
            binom_pmf_log(BinomialLaw(5, 0.5), 6)
        with pytest.raises(ValueError):
            binom_pmf_log(BinomialLaw(5, 0.5), -1)

    @pytest.mark.parametrize("trials", [10, 1000, 10**5, 10**6])
    @pytest.mark.parametrize("p", [0.001, 0.37, 0.5, 0.9])
    def test_normalization_in_log_space(self, trials, p):
        law = BinomialLaw(trials, p)
        lp = law.log_pmf(np.arange(trials + 1))
        assert abs(logsumexp(lp)) <= 1e-12


class TestQValue:
    def test_enumerated_fair_case(self):
        # E[min(2, Binomial(5, 1/2))] enumerates to 57/32.
        assert q_value(5, 2, 0.5) == pytest.approx(57 / 32, rel=1e-15)

    def test_no_competition_single_pick(self):
        for n in range(1, 21):
            assert q_value(n, 1, 1 / n) == pytest.approx(1 - (1 - 1 / n) ** n, rel=1e-13)

    def test_budget_binds_at_full_acceptance(self):
        assert q_value(5, 2, 1.0) == 2.0

    def test_boundaries(self):
        assert q_value(9, 3, 0.0) == 0.0
        assert q_value(4, 4, 1.0) == 4.0

    def test_matches_pmf_enumeration(self):
        rng = np.random.default_rng(1)
        for _ in range(40):
            m = int(rng.integers(1, 200))
            k = int(rng.integers(1, m + 1))
            q = float(rng.uniform(0.01, 0.99))
            ell = np.arange(m + 1)
            want = float(np.sum(np.minimum(k, ell) * scipy_binom.pmf(ell, m, q)))
            assert q_value(m, k, q) == pytest.approx(want, rel=1e-10)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            q_value(2, 3, 0.5)
        with pytest.raises(ValueError):
            q_value(5, 2, 1.5)

    @given(
        m=st.integers(min_value=1, max_value=400),
        k_offset=st.integers(min_value=0, max_value=30),
        a=st.floats(min_value=0.0, max_value=1.0),
        b=st.floats(min_value=0.0, max_value=1.0),
    )
    @settings(max_examples=60, deadline=None)
    def test_monotone_and_midpoint_concave(self, m, k_offset, a, b):
        k = max(1, m - k_offset) if k_offset < m else 1
        lo, hi = (a, b) if a <= b else (b, a)
        mid = 0.5 * (lo + hi)
        v_lo, v_mid, v_hi = (q_value(m, k, x) for x in (lo, mid, hi))
        assert v_lo <= v_hi + 1e-12
        assert v_mid >= 0.5 * (v_lo + v_hi) - 1e-10

    def test_monotone_on_dense_grid(self):
        qs = np.linspace(0.0, 1.0, 1000)
        for m, k in [(7, 2), (50, 5), (120, 17)]:
            vals = q_value(m, k, qs)
            assert np.all(np.diff(vals) >= -1e-12)
            mid = q_value(m, k, 0.5 * (qs[:-1] + qs[1:]))
            assert np.all(mid >= 0.5 * (vals[:-1] + vals[1:]) - 1e-10)


class TestQDeriv:
    def test_full_budget_fair_case(self):
        assert q_deriv(3, 3, 0.5) == pytest.approx(3.0, rel=1e-15)

    def test_at_zero(self):
        assert q_deriv(5, 1, 0.0) == 5.0

    def test_small_probability(self):
        import mpmath

        want = float(1000 * mpmath.mpf("0.999") ** 999)
        assert q_deriv(1000, 1, 0.001) == pytest.approx(want, rel=1e-13)

    def test_matches_finite_difference(self):
        h = 1e-6
        for m, k in [(5, 2), (30, 4), (150, 10)]:
            for q in (0.1, 0.35, 0.7):
                fd = (q_value(m, k, q + h) - q_value(m, k, q - h)) / (2 * h)
                assert q_deriv(m, k, q) == pytest.approx(fd, rel=1e-6)

    def test_nonnegative(self):
        qs = np.linspace(0.0, 1.0, 500)
        assert np.all(q_deriv(37, 6, qs) >= 0.0)


class TestQSecondDeriv:
    def test_linear_when_budget_covers_everything(self):
        for q in (0.0, 0.3, 1.0):
            assert q_second_deriv(6, 6, q) == 0.0

    def test_explicit_value(self):
        assert q_second_deriv(4, 1, 0.5) == pytest.approx(-3.0, rel=1e-14)

    def test_vanishing_factor(self):
        assert q_second_deriv(5, 2, 0.0) == 0.0

    def test_one_above_budget_convention(self):
        # m = k+1 reduces to -m(m-1) q^(k-1).
        m, k, q = 4, 3, 0.4
        assert q_second_deriv(m, k, q) == pytest.approx(-12 * q**2, rel=1e-13)

    def test_matches_finite_difference(self):
        h = 1e-5
        for m, k in [(6, 2), (40, 5), (90, 9)]:
            for q in (0.2, 0.5, 0.8):
                fd = (q_deriv(m, k, q + h) - q_deriv(m, k, q - h)) / (2 * h)
                assert q_second_deriv(m, k, q) == pytest.approx(fd, rel=1e-5)

    def test_nonpositive(self):
        qs = np.linspace(0.0, 1.0, 500)
        assert np.all(q_second_deriv(23, 4, qs) <= 0.0)


class TestGKernel:
    def test_full_budget_is_constant(self):
        for u in (0.0, 0.2, 0.77, 1.0):
            assert g_kernel(7, 7, u) == pytest.approx(7.0, rel=1e-12)

    def test_two_draws_single_pick(self):
        assert g_kernel(2, 1, 0.5) == pytest.approx(1.0, rel=1e-14)

    def test_at_zero(self):
        assert g_kernel(3, 1, 0.0) == 3.0

    def test_bounded_by_n(self):
        us = np.linspace(0.0, 1.0, 2000)
        for n, k in [(10, 3), (100, 7), (200, 200), (200, 1)]:
            vals = g_kernel(n, k, us)
            assert np.all(vals <= n + 1e-9)
            assert np.all(vals >= 0.0)

    @pytest.mark.parametrize("n,k", [(5, 2), (30, 7), (100, 13), (200, 1), (12, 12)])
    def test_integrates_to_budget(self, n, k):
        val, _ = quad(lambda u: g_kernel(n, k, u), 0.0, 1.0, limit=200, epsabs=1e-10)
        assert val == pytest.approx(k, abs=1e-8)

    def test_cumulative_matches_quadrature(self):
        for n, k in [(9, 3), (40, 6)]:
            for u in (0.1, 0.37, 0.8):
                val, _ = quad(lambda x: g_kernel(n, k, x), 0.0, u, limit=200, epsabs=1e-11)
                assert g_cumulative(n, k, u) == pytest.approx(val, abs=1e-9)
        assert g_cumulative(9, 3, 1.0) == pytest.approx(3.0, rel=1e-13)

    def test_domain_error(self):
        with pytest.raises(ValueError):
            g_kernel(5, 2, 1.2)


class TestPoisson:
    def test_single_pick_closed_form(self):
        for lam in (0.2, 1.0, 4.5):
            assert poisson_min_expectation(1, lam) == pytest.approx(1 - math.exp(-lam), rel=1e-14)

    def test_zero_rate(self):
        assert poisson_min_expectation(3, 0.0) == 0.0

    def test_enumerated_case(self):
        assert poisson_min_expectation(2, 2.0) == pytest.approx(2 - 4 * math.exp(-2), rel=1e-14)

    def test_monotone_in_rate(self):
        lams = np.linspace(0.0, 20.0, 200)
        vals = [poisson_min_expectation(4, lam) for lam in lams]
        assert all(b >= a - 1e-13 for a, b in zip(vals, vals[1:]))

    def test_domain_error(self):
        with pytest.raises(ValueError):
            poisson_min_expectation(2, -0.5)

    @pytest.mark.parametrize("k,beta", [(1, 1.0), (2, 0.7), (5, 1.3), (10, 1.01)])
    def test_binomial_limit(self, k, beta):
        m = 10**6
        q = k * beta / m
        assert q_value(m, k, q) == pytest.approx(
            poisson_min_expectation(k, beta * k), abs=1e-4
        )


class TestShortfall:
    def test_complements_q_value(self):
        for m, k, q in [(5, 2, 0.5), (40, 7, 0.1), (9, 9, 0.9)]:
            assert binom_shortfall(m, k, q) == pytest.approx(k - q_value(m, k, q), abs=1e-12)

    def test_tiny_values_keep_precision(self):
        # Shortfall ~ 1e-30 would be invisible inside k - q_value.
        val = binom_shortfall(2000, 2, 0.5)
        exact = float(
            2 * Fraction(1, 2) ** 2000 + 2000 * Fraction(1, 2) ** 2000
        )
        assert val == pytest.approx(exact, rel=1e-10)
