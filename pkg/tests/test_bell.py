import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sixstate.bell import (
    Params,
    SmoothingSet,
    Tally,
    argmax_tally,
    count_tallies,
    enumerate_tallies,
    full_set,
    geometric_tables,
    lambda_g,
    log_sum_tallies,
    smoothing_set,
    tally_of,
)
from sixstate.errors import CapacityError, DomainError
from sixstate.numerics import NEG_INF


def all_tallies(n):
    for t1 in range(n + 1):
        for t2 in range(n + 1 - t1):
            for t3 in range(n + 1 - t1 - t2):
                yield (n - t1 - t2 - t3, t1, t2, t3)


def brute_members(n, center, radius):
    return sorted(t for t in all_tallies(n) if sum(abs(a - b) for a, b in zip(t, center)) < radius)


class TestParams:
    @pytest.mark.parametrize(
        "kw",
        [dict(n=0, gamma=0.1), dict(n=2.5, gamma=0.1), dict(n=5, gamma=0.7),
         dict(n=5, gamma=0.1, epsilon=1.0), dict(n=5, gamma=0.1, ell=-1)],
    )
    def test_rejects(self, kw):
        with pytest.raises(DomainError):
            Params(**kw)

    def test_integral_float_n(self):
        assert Params(1e5, 0.1).n == 100000


class TestTally:
    def test_examples(self):
        assert tally_of((0, 1, 2), (1, 1, 1)) == (1, 1, 1, 0)
        assert tally_of((0,) * 6, (3, 1, 2, 2, 1, 3)) == (6, 0, 0, 0)
        # 3 = 2+1, 1 = 3+1 cyclically, 2 = 1+1
        assert tally_of((3, 1, 2), (2, 3, 1)) == (0, 0, 3, 0)

    def test_plus_two(self):
        assert tally_of((1, 2, 3), (2, 3, 1)) == (0, 0, 0, 3)

    @pytest.mark.parametrize("g, j", [((4,), (1,)), ((1,), (0,)), ((1, 2), (1,))])
    def test_rejects(self, g, j):
        with pytest.raises(DomainError):
            tally_of(g, j)

    @given(st.lists(st.tuples(st.integers(0, 3), st.integers(1, 3)), min_size=1, max_size=12))
    def test_uniform_relabel_invariant(self, pairs):
        g, j = zip(*pairs)
        shift = lambda s: 0 if s == 0 else s % 3 + 1  # noqa: E731
        assert tally_of([shift(x) for x in g], [shift(x) for x in j]) == tally_of(g, j)

    def test_class_sizes(self):
        n, j = 3, (1, 2, 3)
        counts = {}
        for g in itertools.product(range(4), repeat=n):
            t = tally_of(g, j)
            counts[t] = counts.get(t, 0) + 1
        for t, c in counts.items():
            assert c == math.factorial(n) // math.prod(math.factorial(x) for x in t)


class TestLambda:
    def test_examples(self):
        assert lambda_g((1, 0, 0, 0), 0.1) == pytest.approx(math.log2(0.3825), abs=1e-14)
        assert lambda_g((0, 1, 0, 0), 0.1) == pytest.approx(math.log2(0.0225), abs=1e-14)
        assert lambda_g((0, 0, 1, 0), 0.1) == pytest.approx(math.log2(0.0025), abs=1e-14)
        assert lambda_g((4, 0, 0, 0), 0.0) == -4.0
        assert lambda_g((3, 1, 0, 0), 0.0) == NEG_INF

    @pytest.mark.parametrize("gamma", ["1/100", "1/20", "1/10", "1/5"])
    def test_sum_over_strings_factorizes(self, gamma):
        # sum over g factorizes into (a + b + 2c) / 2 per position
        g = Fraction(gamma)
        a, b, c = (1 - g) * (1 - Fraction(3, 2) * g), g / 2 * (1 - g), g * g / 2
        per_site = (a + b + 2 * c) / 2
        n = 3
        total = sum(
            2.0 ** lambda_g(tally_of(s, (1, 1, 1)), float(g))
            for s in itertools.product(range(4), repeat=n)
        )
        assert total == pytest.approx(float(per_site**n), rel=1e-13)


class TestSmoothingSet:
    def test_alpha_zero_empty(self):
        s = smoothing_set(Params(100, 0.1), 0.0)
        assert (85, 5, 5, 5) not in s
        assert list(enumerate_tallies(s)) == []
        assert count_tallies(s) == 0

    def test_large_alpha_everything(self):
        s = smoothing_set(Params(3, 0.1), 10.0)
        assert len(list(enumerate_tallies(s))) == 20

    def test_membership_example(self):
        assert (85, 5, 5, 5) in smoothing_set(Params(100, 0.1), 1.0)
        assert (80, 10, 5, 5) not in smoothing_set(Params(100, 0.1), 1.0)  # distance 10, strict

    @pytest.mark.parametrize("n, gamma, alpha", [(100, 0.1, 1.0), (40, 0.2, 2.5), (17, 0.05, 1.3), (9, 0.3, 0.7)])
    def test_enumeration_matches_brute_force(self, n, gamma, alpha):
        s = smoothing_set(Params(n, gamma), alpha)
        got = sorted(tuple(t) for t in enumerate_tallies(s))
        assert got == brute_members(n, s.center, s.radius)
        assert count_tallies(s) == len(got)

    def test_order_is_lexicographic(self):
        ts = [(t.t1, t.t2, t.t3) for t in enumerate_tallies(smoothing_set(Params(30, 0.2), 2.0))]
        assert ts == sorted(ts)

    def test_full_set(self):
        for n in (1, 2, 7, 25):
            assert count_tallies(full_set(n)) == math.comb(n + 3, 3)

    def test_capacity_guard(self):
        s = full_set(2000)
        with pytest.raises(CapacityError):
            log_sum_tallies(s, np.zeros((4, 2001)), max_tallies=1000)

    def test_negative_alpha(self):
        with pytest.raises(DomainError):
            smoothing_set(Params(10, 0.1), -1)


class TestTallySums:
    def test_multinomial_theorem(self):
        # sum over all tallies of multinomial * prod w^t = (sum w)^n
        w = [0.1, 0.2, 0.3, 0.4]
        n = 50
        tables = geometric_tables(n, [math.log2(x) for x in w])
        assert log_sum_tallies(full_set(n), tables) == pytest.approx(0.0, abs=1e-12)
        tables = geometric_tables(n, [math.log2(2 * x) for x in w])
        assert log_sum_tallies(full_set(n), tables) == pytest.approx(n, abs=1e-10)

    def test_zero_weight_row(self):
        tables = geometric_tables(10, [0.0, NEG_INF, NEG_INF, NEG_INF])
        assert log_sum_tallies(full_set(10), tables) == pytest.approx(0.0, abs=1e-15)

    def test_against_brute_force(self):
        n = 12
        rng = np.random.default_rng(3)
        tables = rng.normal(size=(4, n + 1))
        s = smoothing_set(Params(n, 0.15), 1.5)
        ref = 0.0
        for t in brute_members(n, s.center, s.radius):
            mult = math.factorial(n) // math.prod(math.factorial(x) for x in t)
            ref += mult * 2.0 ** sum(tables[a][t[a]] for a in range(4))
        assert log_sum_tallies(s, tables) == pytest.approx(math.log2(ref), abs=1e-12)

    def test_empty_set_is_neg_inf(self):
        s = smoothing_set(Params(10, 0.1), 0.0)
        assert log_sum_tallies(s, np.zeros((4, 11))) == NEG_INF

    def test_worker_count_bit_identical(self):
        s = smoothing_set(Params(300, 0.1), 4.0)
        tables = geometric_tables(300, [math.log2(x) for x in (0.85, 0.05, 0.05, 0.05)])
        one = log_sum_tallies(s, tables)
        assert log_sum_tallies(s, tables, workers=3) == one

    def test_shape_checked(self):
        with pytest.raises(DomainError):
            log_sum_tallies(full_set(4), np.zeros((4, 4)))

    @settings(max_examples=20, deadline=None)
    @given(st.integers(1, 40), st.floats(0.5, 6.0))
    def test_argmax_matches_scan(self, n, alpha):
        s = smoothing_set(Params(n, 0.1), alpha)
        obj = np.array([np.arange(n + 1) * c for c in (0.3, 1.7, 1.0, 0.9)])
        members = list(enumerate_tallies(s))
        best, val = argmax_tally(s, obj)
        if not members:
            assert best is None
            return
        vals = [sum(obj[a][t[a]] for a in range(4)) for t in members]
        assert val == pytest.approx(max(vals))
        assert isinstance(best, Tally) and best in s
