"""Invariant suites behind ``sixstate verify``.

Every suite is a list of :class:`CheckResult`; output depends only on the seed.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Callable, Iterator

import numpy as np

from .bell import Params, argmax_tally, smoothing_set
from .numerics import bhc_tail, from_linear, log2_factorial, log_sum, to_linear
from .oracle import (
    CheckResult,
    build_A_and_check,
    exact_breakdown,
    exact_distance,
    make_rng,
    verify_projection_lemma,
    verify_purification,
    verify_sigma_average,
)
from .oracle.montecarlo import bhc_empirical
from .oracle.toeplitz import all_seeds
from .qkd import (
    asymptotic_rate,
    asymptotic_threshold,
    bound_no_smoothing,
    dbar_full_enumeration,
    dbar_smoothed_analytic,
    dbar_smoothed_exact,
    default_alpha,
    key_length,
    predicted_maximizer,
    ratio_tables,
    smoothing_loss_analytic,
    smoothing_loss_exact,
    tail_mass_exact,
)
from .qkr import (
    WeightWindow,
    dbar_qkr_analytic,
    dbar_qkr_exact,
    lambda_qkr,
    lambda_qkr_full,
    lambda_qkr_stirling_bound,
    qkr_report,
    stirling_bound_applies,
    stirling_factorial_bounds,
    weight_window,
)

SUITES = ("lemmas", "oracle", "bounds", "qkr")
Suite = Callable[..., Iterator[CheckResult]]


def _check(name: str, slack: float, ok: bool | None = None, detail: str = "") -> CheckResult:
    """``slack`` is a margin: nonnegative means the inequality held."""
    return CheckResult(name, slack >= 0 if ok is None else ok, slack, detail)


def lemmas(seed: int, **kw) -> Iterator[CheckResult]:
    yield verify_projection_lemma(2000, 8, seed)
    est = bhc_empirical(400, [0.85, 0.05, 0.05, 0.05], 2.0, 20000, seed)
    yield CheckResult(
        "multinomial tail n=400 alpha=2", est.passed, est.bound - est.frequency,
        f"frequency {est.frequency:.4g} vs bound {est.bound:.4g}",
    )
    for gamma in (0.0, 0.01, 0.05, 0.1, 0.2, 0.5):
        for j in (1, 2, 3):
            yield verify_sigma_average(j, gamma)
        yield verify_purification(gamma)
    for n in (1, 2):
        for gamma in (0.01, 0.05, 0.1, 0.2):
            for j in itertools.product((1, 2, 3), repeat=n):
                yield build_A_and_check(n, j, gamma)
    rng = make_rng(seed, 10)
    for k in rng.choice(27, size=3, replace=False).tolist():
        j = np.unravel_index(k, (3, 3, 3))
        yield build_A_and_check(3, tuple(int(x) + 1 for x in j), 0.1)


def _rank_gf2(m: np.ndarray) -> int:
    m = m.copy() % 2
    rank = 0
    for col in range(m.shape[1]):
        pivot = next((r for r in range(rank, m.shape[0]) if m[r, col]), None)
        if pivot is None:
            continue
        m[[rank, pivot]] = m[[pivot, rank]]
        for r in range(m.shape[0]):
            if r != rank and m[r, col]:
                m[r] ^= m[rank]
        rank += 1
    return rank


def oracle(seed: int, **kw) -> Iterator[CheckResult]:
    for n in (1, 2):
        for ell in range(1, n + 1):
            for gamma in (0.0, 0.05, 0.1):
                d = exact_distance(n, ell, gamma)
                bound = min(1.0, to_linear(bound_no_smoothing(Params(n, gamma, 0.5, ell)).d_bar))
                yield _check(f"exact D <= bound n={n} ell={ell} gamma={gamma}", bound - d)
    # at n = 3 the per-basis bound is checked on a seeded sample of basis strings
    rng = make_rng(seed, 11)
    for k in rng.choice(27, size=2, replace=False).tolist():
        j = tuple(int(x) + 1 for x in np.unravel_index(k, (3, 3, 3)))
        d = exact_distance(3, 2, 0.1, j_strings=[j])
        bound = min(1.0, to_linear(bound_no_smoothing(Params(3, 0.1, 0.5, 2)).d_bar))
        yield _check(f"exact D <= bound n=3 ell=2 j={''.join(map(str, j))}", bound - d)
    for n in (1, 2):
        for ell in range(1, n + 1):
            ranks = [_rank_gf2(h.matrix()) for h in all_seeds(n, ell)]
            expect = float(np.mean([1 - 2.0 ** (r - ell) for r in ranks]))
            got = exact_distance(n, ell, 0.0)
            err = abs(got - expect)
            yield _check(f"noiseless D equals hash rank deficit n={n} ell={ell}", 1e-12 - err)
    for n, gamma, alpha in ((1, 0.1, 1.0), (2, 0.1, 1.0), (2, 0.2, 0.5)):
        p = Params(n, gamma, 0.5, 1)
        sset = smoothing_set(p, alpha)
        br = exact_breakdown(n, 1, gamma, sset)
        s = 1.0 - tail_mass_exact(p, alpha)
        tag = f"n={n} gamma={gamma} alpha={alpha}"
        yield _check(f"kept trace equals S {tag}", 1e-12 - abs(br.kept_trace - s))
        yield _check(f"smoothing distance <= sqrt(1-S) {tag}", math.sqrt(max(0.0, 1 - s)) - br.smoothing_distance)
        yield _check(f"D-bar <= enumerated bound {tag}", to_linear(dbar_smoothed_exact(p, alpha)) - br.d_bar)
        yield _check(f"D <= 2 dist + D-bar {tag}", 2 * br.smoothing_distance + br.d_bar - br.d + 1e-12)


def bounds(seed: int, **kw) -> Iterator[CheckResult]:
    ns = list(range(1, 41)) + list(range(50, 301, 50))
    for gamma in (0.01, 0.05, 0.1, 0.12):
        worst = 0.0
        for n in ns:
            p = Params(n, gamma, 0.5, 0)
            err = abs(dbar_full_enumeration(p, **kw) - bound_no_smoothing(p).d_bar)
            worst = max(worst, err)
        yield _check(f"full enumeration recovers no-smoothing bound gamma={gamma}", 1e-10 - worst)
    for n in (50, 100, 200, 500):
        for gamma in (0.05, 0.1):
            p = Params(n, gamma, 0.5, 0)
            for alpha in range(1, 9):
                tail = tail_mass_exact(p, alpha, **kw)
                tag = f"n={n} gamma={gamma} alpha={alpha}"
                yield _check(f"tail mass < multinomial bound {tag}", bhc_tail(alpha) - tail, tail < bhc_tail(alpha))
                yield _check(
                    f"smoothing loss exact <= analytic {tag}",
                    smoothing_loss_analytic(alpha) - smoothing_loss_exact(p, alpha, **kw),
                )
                yield _check(
                    f"D-bar exact <= analytic {tag}",
                    dbar_smoothed_analytic(p, alpha) - dbar_smoothed_exact(p, alpha, **kw),
                )
    for n in (50, 150, 300):
        p = Params(n, 0.1, 0.5, 0)
        alpha = 3.0
        best, _ = argmax_tally(smoothing_set(p, alpha), ratio_tables(p))
        pred = predicted_maximizer(p, alpha)
        gap = max(abs(b - q) for b, q in zip(best, pred))
        yield _check(f"maximizer near predicted tally n={n}", 2.0 - gap, detail=f"argmax {tuple(best)}")
    rng = make_rng(seed, 12)
    for _ in range(6):
        n = int(10 ** rng.uniform(3, 7))
        gamma = float(rng.uniform(0.01, 0.12))
        for eps in (2.0**-64, 2.0**-128):
            ell = key_length(n, gamma, eps)
            got = dbar_smoothed_analytic(Params(n, gamma, eps, 0), default_alpha(eps)) + 0.5 * ell
            err = abs(got - math.log2(eps))
            yield _check(f"calibration n={n} gamma={gamma:.4f} log2eps={math.log2(eps):.0f}", 1e-9 - err)
    g_star = asymptotic_threshold()
    yield _check("asymptotic zero crossing", 5e-4 - abs(g_star - 0.1262), detail=f"gamma*={g_star:.9f}")


def qkr(seed: int, **kw) -> Iterator[CheckResult]:
    worst = 0.0
    for n in (5, 20, 80, 200):
        for gamma in (0.01, 0.05, 0.1, 0.3):
            for t0 in range(0, n + 1, max(1, n // 10)):
                full = WeightWindow(0, n)
                exact = lambda_qkr(t0, n, gamma, full)
                worst = max(worst, abs(exact - lambda_qkr_full(t0, n, gamma)))
    yield _check("full-window collapse", 1e-10 - worst)
    margin = math.inf
    for k in range(1, 201):
        lo, hi = stirling_factorial_bounds(k)
        f = log2_factorial(k)
        margin = min(margin, f - lo, hi - f)
    yield _check("Stirling sandwich k<=200", margin + 1e-12)
    margin, count = math.inf, 0
    for n in range(10, 121, 10):
        for gamma in (0.05, 0.1):
            win = weight_window(n, gamma, 2.0)
            for t0 in range(n + 1):
                if stirling_bound_applies(t0, n, gamma, win):
                    count += 1
                    diff = lambda_qkr_stirling_bound(t0, n, gamma, win) - lambda_qkr(t0, n, gamma, win)
                    margin = min(margin, diff)
    yield _check("Lambda <= Stirling bound on its domain", margin, detail=f"{count} cases")
    for n in (100, 200):
        for gamma in (0.05, 0.1):
            p = Params(n, gamma, 0.5, 0)
            for alpha in (1.0, 2.0):
                win = weight_window(n, gamma, alpha)
                try:
                    analytic = dbar_qkr_analytic(p, alpha, win)
                except ValueError:
                    continue
                exact = dbar_qkr_exact(p, alpha, win, **kw)
                yield _check(f"QKR D-bar exact <= analytic n={n} gamma={gamma} alpha={alpha}", analytic - exact)
    for gamma in (0.01, 0.02, 0.05, 0.1):
        r = qkr_report(10**8, gamma, 2.0**-128)
        gap = abs(r.rate - asymptotic_rate(gamma))
        yield _check(f"QKR rate near asymptotic n=1e8 gamma={gamma}", 0.01 - gap, detail=f"rate {r.rate:.6f}")


SUITE_FUNCS: dict[str, Suite] = {"lemmas": lemmas, "oracle": oracle, "bounds": bounds, "qkr": qkr}


def run(suite: str, seed: int, **kw) -> list[CheckResult]:
    """``kw`` (``workers``, ``max_tallies``) goes to every tally enumeration."""
    names = SUITES if suite == "all" else (suite,)
    out = []
    for name in names:
        out.extend(SUITE_FUNCS[name](seed, **kw))
    return out


def format_result(r: CheckResult) -> str:
    status = "PASS" if r.passed else "FAIL"
    line = f"{status}  {r.name}  slack={r.slack:.6e}"
    return f"{line}  ({r.detail})" if r.detail else line
