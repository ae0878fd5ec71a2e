import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sixstate.bell import Params, SmoothingSet, argmax_tally, full_set, smoothing_set
from sixstate.errors import DomainError
from sixstate.numerics import NEG_INF, binary_entropy, h4, to_linear
from sixstate.qkd import (
    BoundReport,
    Method,
    asymptotic_rate,
    asymptotic_threshold,
    bound_no_smoothing,
    dbar_full_enumeration,
    dbar_smoothed_analytic,
    dbar_smoothed_exact,
    default_alpha,
    key_length,
    key_length_no_smoothing,
    predicted_maximizer,
    rate_finite,
    rate_from_key_length,
    rate_no_smoothing,
    rate_point,
    ratio_tables,
    report_smoothed_analytic,
    report_smoothed_exact,
    smoothing_loss_analytic,
    smoothing_loss_exact,
    tail_mass_exact,
)

EPS = 2.0**-128


def brute_smoothed(n, gamma, alpha):
    """(1 - S, sum of multinomial * sqrt(lambda)) by a plain loop over all tallies."""
    w = (1 - 1.5 * gamma, gamma / 2, gamma / 2, gamma / 2)
    a, b, c = (1 - gamma) * (1 - 1.5 * gamma), gamma / 2 * (1 - gamma), gamma**2 / 2
    m = [n * x for x in w]
    r = alpha * math.sqrt(n)
    kept = root = 0.0
    for t1 in range(n + 1):
        for t2 in range(n + 1 - t1):
            for t3 in range(n + 1 - t1 - t2):
                t = (n - t1 - t2 - t3, t1, t2, t3)
                if sum(abs(x - y) for x, y in zip(t, m)) >= r:
                    continue
                lm = math.lgamma(n + 1) - sum(math.lgamma(x + 1) for x in t)
                kept += math.exp(lm + sum(x * math.log(p) for x, p in zip(t, w)))
                root += math.exp(lm + 0.5 * (t[0] * math.log(a) + t[1] * math.log(b) + (t[2] + t[3]) * math.log(c)))
    return 1 - kept, root


class TestNoSmoothing:
    def test_noiseless(self):
        assert bound_no_smoothing(Params(7, 0.0, EPS, 7)).d_bar == pytest.approx(-1.0, abs=1e-15)

    def test_single_qubit_example(self):
        ref = 0.5 * (math.sqrt(0.765) + math.sqrt(0.045) + 2 * math.sqrt(0.005))
        d = bound_no_smoothing(Params(1, 0.1, EPS, 1)).d_bar
        assert to_linear(d) == pytest.approx(ref, rel=1e-13)
        assert to_linear(d) == pytest.approx(0.6141, abs=1e-4)

    def test_report_fields(self):
        r = bound_no_smoothing(Params(10, 0.1, EPS, 2))
        assert r.smoothing_loss == NEG_INF and r.method is Method.NO_SMOOTHING
        assert r.d_total == r.d_bar

    @pytest.mark.parametrize("n", [1, 5, 40, 300])
    @pytest.mark.parametrize("gamma", [0.01, 0.07, 0.12, 0.3])
    def test_full_enumeration_recovers(self, n, gamma):
        p = Params(n, gamma, EPS, 3)
        assert dbar_full_enumeration(p) == pytest.approx(bound_no_smoothing(p).d_bar, abs=1e-10)


class TestSmoothingLoss:
    def test_full_and_empty(self):
        p = Params(30, 0.1)
        assert tail_mass_exact(p, 0.0, sset=full_set(30)) == pytest.approx(0.0, abs=1e-14)
        assert tail_mass_exact(p, 0.0) == 1.0
        assert smoothing_loss_exact(p, 0.0) == 0.0

    def test_against_brute_force(self):
        tail, _ = brute_smoothed(100, 0.1, 3.0)
        got = tail_mass_exact(Params(100, 0.1), 3.0)
        assert got == pytest.approx(tail, rel=1e-9)
        assert got == pytest.approx(1.258e-4, rel=1e-3)
        assert smoothing_loss_exact(Params(100, 0.1), 3.0) <= smoothing_loss_analytic(3.0)

    def test_analytic_examples(self):
        assert smoothing_loss_analytic(0.0) == 2.0
        assert smoothing_loss_analytic(2 * math.sqrt(math.log(4))) == pytest.approx(0.0, abs=1e-14)
        assert smoothing_loss_analytic(default_alpha(EPS)) == pytest.approx(-128.0, abs=1e-11)
        with pytest.raises(DomainError):
            smoothing_loss_analytic(-1.0)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(20, 250), st.sampled_from([0.02, 0.05, 0.1, 0.15]), st.floats(0.5, 8.0))
    def test_domination(self, n, gamma, alpha):
        p = Params(n, gamma)
        assert tail_mass_exact(p, alpha) < 16 * math.exp(-alpha**2 / 2)
        assert smoothing_loss_exact(p, alpha) <= smoothing_loss_analytic(alpha)


class TestDbar:
    def test_against_brute_force(self):
        _, root = brute_smoothed(60, 0.1, 2.0)
        p = Params(60, 0.1, EPS, 10)
        assert dbar_smoothed_exact(p, 2.0) == pytest.approx(-1 + (10 - 60) / 2 + math.log2(root), abs=1e-11)

    def test_empty_set(self):
        assert dbar_smoothed_exact(Params(10, 0.1), 0.0) == NEG_INF

    def test_exact_below_analytic_example(self):
        p = Params(100, 0.1, EPS, 10)
        assert dbar_smoothed_exact(p, 5.0) <= dbar_smoothed_analytic(p, 5.0)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(10, 250), st.sampled_from([0.01, 0.05, 0.1, 0.12]), st.floats(0.3, 8.0))
    def test_mean_below_max(self, n, gamma, alpha):
        p = Params(n, gamma, EPS, n // 3)
        assert dbar_smoothed_exact(p, alpha) <= dbar_smoothed_analytic(p, alpha) + 1e-12

    def test_alpha_zero_closed_form(self):
        n = 50
        d = dbar_smoothed_analytic(Params(n, 0.1, EPS, n), 0.0)
        assert d == pytest.approx(-1 + n / 2 * (h4(0.1) - binary_entropy(0.1)))
        assert d >= -1

    def test_requires_noise(self):
        with pytest.raises(DomainError, match="nosmooth|no-smoothing|without"):
            dbar_smoothed_analytic(Params(10, 0.0), 1.0)

    def test_reports(self):
        p = Params(80, 0.1, EPS, 5)
        ex, an = report_smoothed_exact(p, 3.0), report_smoothed_analytic(p, 3.0)
        assert ex.method is Method.SMOOTHED_EXACT and an.method is Method.SMOOTHED_ANALYTIC
        assert ex.d_total <= an.d_total
        r = BoundReport(-3.0, -4.0, Method.SMOOTHED_ANALYTIC)
        assert to_linear(r.d_total) == pytest.approx(2 * 2.0**-4 + 2.0**-3)


class TestMaximizer:
    @pytest.mark.parametrize("n", [30, 100, 300])
    @pytest.mark.parametrize("gamma", [0.05, 0.1])
    def test_shift_from_t0_to_t1(self, n, gamma):
        p, alpha = Params(n, gamma), 3.0
        best, val = argmax_tally(smoothing_set(p, alpha), ratio_tables(p))
        pred = predicted_maximizer(p, alpha)
        m = smoothing_set(p, alpha).center
        assert max(abs(x - y) for x, y in zip(best, pred)) < 2.0
        assert best.t0 < m[0] and best.t1 > m[1]
        # the real-valued point is on the boundary, so it bounds the integer max
        pred_val = sum(ratio_tables(p)[a][1] * pred[a] for a in range(4))
        assert val <= pred_val + 1e-9


class TestRates:
    def test_asymptotic_examples(self):
        assert asymptotic_rate(0.0) == 1.0
        assert asymptotic_rate(0.05) == pytest.approx(0.49682, abs=1e-4)

    def test_threshold_against_grid(self):
        g = np.linspace(0.10, 0.14, 400001)
        rates = np.array([asymptotic_rate(x) for x in g[::100]])
        coarse = g[::100][np.argmax(rates < 0)]
        assert asymptotic_threshold() == pytest.approx(coarse, abs=1e-5)
        assert asymptotic_threshold() == pytest.approx(0.1262, abs=5e-4)

    def test_default_alpha(self):
        assert 4 * math.exp(-default_alpha(EPS) ** 2 / 4) == pytest.approx(EPS, rel=1e-12)
        with pytest.raises(DomainError):
            default_alpha(0.0)

    @pytest.mark.parametrize("n", [10**3, 10**5, 10**7])
    @pytest.mark.parametrize("gamma", [0.01, 0.05, 0.12])
    @pytest.mark.parametrize("eps", [2.0**-64, EPS])
    def test_calibration(self, n, gamma, eps):
        ell = key_length(n, gamma, eps)
        d0 = dbar_smoothed_analytic(Params(n, gamma, eps, 0), default_alpha(eps))
        assert d0 + ell / 2 == pytest.approx(math.log2(eps), abs=1e-9)

    def test_floor_key_length_meets_target(self):
        ell = math.floor(key_length(10**5, 0.05, EPS))
        assert dbar_smoothed_analytic(Params(10**5, 0.05, EPS, ell), default_alpha(EPS)) <= -128

    def test_key_length_near_one(self):
        # the sqrt term keeps ln 4, so eps -> 1 does not drop it
        n, g, eps = 1000, 0.05, 1 - 1e-12
        lim = n + 2 - n * h4(g) + n * binary_entropy(g)
        assert key_length(n, g, eps) == pytest.approx(
            lim - math.sqrt(n * math.log(4)) * math.log2(2 / g * (1 - 1.5 * g)), abs=1e-6
        )

    def test_rate_vs_key_length(self):
        for n in (10**3, 10**5, 10**7):
            ell = key_length(n, 0.05, EPS)
            gap = rate_from_key_length(n, 0.05, ell) - rate_finite(n, 0.05, EPS)
            expect = 2 / n - 30 * (math.log2(n + 1) - math.log2(n)) / n
            assert gap == pytest.approx(expect, abs=1e-12)

    def test_requires_noise(self):
        for fn in (key_length, rate_finite):
            with pytest.raises(DomainError):
                fn(1000, 0.0, EPS)

    def test_no_smoothing_noiseless(self):
        n = 10**5
        assert key_length_no_smoothing(n, 0.0, EPS) == pytest.approx(n + 2 - 256)
        expect = 1 - (30 * math.log2(n + 1) + 256 - 2) / n
        assert rate_no_smoothing(n, 0.0, EPS) == pytest.approx(expect, abs=1e-14)

    def test_no_smoothing_meets_target(self):
        n, g = 5000, 0.03
        ell = key_length_no_smoothing(n, g, EPS)
        assert bound_no_smoothing(Params(n, g, EPS, ell)).d_bar == pytest.approx(-128, abs=1e-9)

    def test_finite_below_asymptotic_and_increasing(self):
        for g in (0.02, 0.05, 0.1):
            r = [rate_finite(n, g, EPS) for n in (10**4, 10**5, 10**6, 10**7, 10**11)]
            assert all(x < y for x, y in zip(r, r[1:]))
            assert r[-1] < asymptotic_rate(g)
            assert r[-1] == pytest.approx(asymptotic_rate(g), abs=1e-3)

    def test_rate_point(self):
        p = rate_point(10**5, 0.05, EPS, "smoothed")
        assert p.rate == rate_finite(10**5, 0.05, EPS) and not p.negative
        assert rate_point(10**5, 0.14, EPS, "smoothed").negative
        assert rate_point(10**5, 0.05, EPS, "asymptotic").rate == asymptotic_rate(0.05)
        assert rate_point(10**5, 0.05, EPS, "nosmooth").rate == rate_no_smoothing(10**5, 0.05, EPS)
        with pytest.raises(DomainError):
            rate_point(10**5, 0.05, EPS, "bogus")
