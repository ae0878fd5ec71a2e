"""``sixstate`` command line: single-point rates, curves, the figure and checks."""

from __future__ import annotations

import argparse
import json
import math
import re
import sys

from . import report, verify
from .bell import Params
from .errors import CapacityError, DomainError
from .numerics import to_linear
from .qkd import (
    POSTSELECTION_COEFF,
    bound_no_smoothing,
    default_alpha,
    rate_point,
    report_smoothed_analytic,
)
from .qkr import qkr_report

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_REDIRECT, EXIT_IO = 0, 1, 2, 3, 4


# -- argument types ------------------------------------------------------------


def parse_n(text: str) -> int:
    """Positive integer, scientific notation allowed (``1e5``)."""
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(value) or value != int(value) or value < 1:
        raise argparse.ArgumentTypeError(f"n must be a positive integer, got {text!r}")
    return int(value)


def parse_n_list(text: str) -> tuple[int, ...]:
    return tuple(parse_n(part) for part in text.split(",") if part)


def parse_eps(text: str) -> float:
    """``2^-128``, ``2**-128``, ``1e-38`` or a plain decimal in (0, 1)."""
    m = re.fullmatch(r"\s*2\s*(?:\^|\*\*)\s*(-?\d+(?:\.\d+)?)\s*", text)
    try:
        value = 2.0 ** float(m.group(1)) if m else float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse epsilon {text!r}") from None
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"epsilon must lie in (0, 1), got {text!r}")
    return value


def parse_gamma(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 <= value < 2.0 / 3.0:
        raise argparse.ArgumentTypeError(f"QBER must lie in [0, 2/3), got {text!r}")
    return value


def _positive(kind):
    def parse(text: str):
        value = kind(text)
        if value <= 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text!r}")
        return value

    return parse


# -- commands ------------------------------------------------------------------

REDIRECT = (
    "the smoothed bound needs QBER > 0 (its slope term diverges at 0); "
    "use --method nosmooth for the noiseless rate"
)


def _emit(fields: list[tuple[str, object, str]], as_json: bool) -> None:
    if as_json:
        print(json.dumps({k: v for k, v, _ in fields}, sort_keys=False))
        return
    width = max(len(k) for k, _, _ in fields)
    for key, value, source in fields:
        text = f"{value:.17g}" if isinstance(value, float) else str(value)
        print(f"{key:<{width}}  {text}" + (f"    [{source}]" if source else ""))


def cmd_rate(args) -> int:
    n, gamma, eps, method = args.n, args.gamma, args.eps, args.method
    if method == "qkr":
        return cmd_qkr_rate(args)
    if method == "smoothed" and gamma == 0:
        print(f"error: {REDIRECT}", file=sys.stderr)
        return EXIT_REDIRECT
    point = rate_point(n, gamma, eps, method)
    fields = [
        ("method", method, ""),
        ("n", n, ""),
        ("gamma", gamma, ""),
        ("epsilon", eps, ""),
        ("log2_epsilon", math.log2(eps), ""),
    ]
    if method == "asymptotic":
        fields.append(("rate", point.rate, "1 - H(Bell weights)"))
    else:
        ell_eval = max(point.ell, 0.0)
        if method == "smoothed":
            alpha = default_alpha(eps)
            bound = report_smoothed_analytic(Params(n, gamma, eps, ell_eval), alpha)
            fields += [
                ("rate", point.rate, "finite-size rate, 30 log2(n)/n penalty"),
                ("rate_clamped", max(0.0, point.rate), "max(0, rate)"),
                ("ell", point.ell, "closed-form key length"),
                ("alpha", alpha, "2 sqrt(ln(4/eps))"),
                ("d_bar_log2", bound.d_bar, "mean-vs-max closed form"),
                ("smoothing_loss_log2", bound.smoothing_loss, "4 exp(-alpha^2/4)"),
            ]
        else:
            bound = bound_no_smoothing(Params(n, gamma, eps, ell_eval))
            fields += [
                ("rate", point.rate, "(ell - n h(gamma) - 30 log2(n+1)) / n"),
                ("rate_clamped", max(0.0, point.rate), "max(0, rate)"),
                ("ell", point.ell, "no-smoothing key length"),
                ("alpha", None, "not used"),
                ("d_bar_log2", bound.d_bar, "sum of sqrt(eigenvalues), no smoothing"),
                ("smoothing_loss_log2", bound.smoothing_loss, "no smoothing"),
            ]
        fields += [
            ("d_total_log2", bound.d_total, "log2(2 * smoothing loss + d_bar)"),
            ("d_total", to_linear(bound.d_total), ""),
            ("bound_evaluated_at_ell", ell_eval, "ell clamped at 0" if point.ell < 0 else ""),
            ("negative_rate", point.negative, ""),
        ]
    fields += [
        ("penalty_rate_formula", f"{POSTSELECTION_COEFF}*log2(n)/n", "smoothed rate"),
        ("penalty_key_length", f"{POSTSELECTION_COEFF}*log2(n+1)", "no-smoothing and QKR rates"),
    ]
    _emit(fields, args.json)
    return EXIT_OK


def cmd_qkr_rate(args) -> int:
    if args.gamma == 0:
        print(f"error: {REDIRECT}", file=sys.stderr)
        return EXIT_REDIRECT
    r = qkr_report(args.n, args.gamma, args.eps, args.alpha_beta)
    fields = [
        ("method", "qkr", ""),
        ("n", r.n, ""),
        ("gamma", r.gamma, ""),
        ("epsilon", r.epsilon, ""),
        ("log2_epsilon", math.log2(r.epsilon), ""),
        ("rate", r.rate, "(ell - n h(gamma) - 30 log2(n+1)) / n"),
        ("rate_clamped", max(0.0, r.rate), "max(0, rate)"),
        ("ell", r.ell, "message length where D-bar = eps"),
        ("alpha", r.alpha, "2 sqrt(ln(4/eps))"),
        ("beta", r.beta, "weight window width"),
        ("window", f"[{r.window.w_min}, {r.window.w_max}]", ""),
        ("d_bar_log2", r.d_bar, "Stirling-bounded closed form"),
        ("truncation_loss_log2", r.truncation_loss, "binomial mass outside the window"),
        ("negative_rate", r.rate < 0, ""),
        ("penalty_key_length", f"{POSTSELECTION_COEFF}*log2(n+1)", ""),
    ]
    _emit(fields, args.json)
    return EXIT_OK


def _curve_spec(args) -> report.CurveSpec:
    return report.CurveSpec(
        args.gamma_min,
        args.gamma_max,
        args.steps,
        args.n,
        args.eps,
        tuple(args.method.split(",")),
        nosmooth_n=None if args.nosmooth_n is None else args.nosmooth_n,
        beta=args.alpha_beta,
    )


def _negative_note(curves) -> None:
    neg = sum(p.rate < 0 for c in curves for p in c.points)
    if neg:
        print(f"note: {neg} rows have a negative rate (kept unclamped)", file=sys.stderr)


def cmd_curve(args) -> int:
    spec = _curve_spec(args)
    curves = report.compute_curves(spec, workers=args.workers)
    text = report.curves_to_csv(curves)
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    if args.plot:
        report.render_figure(curves, args.plot, spec.epsilon)
    _negative_note(curves)
    return EXIT_OK


def cmd_fig1(args) -> int:
    spec = report.FIG1_SPEC
    curves = report.compute_curves(spec, workers=args.workers)
    report.render_figure(curves, args.out, spec.epsilon, xmax=0.15)
    if args.csv:
        report.write_csv(curves, args.csv)
    return EXIT_OK


def cmd_verify(args) -> int:
    failed = 0
    for r in verify.run(args.suite, args.seed, workers=args.workers, max_tallies=args.max_tallies):
        print(verify.format_result(r))
        failed += not r.passed
    total = "all" if args.suite == "all" else args.suite
    print(f"{'FAILED' if failed else 'OK'}: suite={total} seed={args.seed} failures={failed}")
    return EXIT_VERIFY if failed else EXIT_OK


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sixstate", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, workers=True):
        p.add_argument("--eps", type=parse_eps, default=2.0**-128, help="security parameter, e.g. 2^-128")
        if workers:
            p.add_argument("--workers", type=_positive(int), default=1)

    for name, fn in (("rate", cmd_rate), ("qkr-rate", cmd_qkr_rate)):
        p = sub.add_parser(name, help=f"single-point {'QKR ' if name == 'qkr-rate' else ''}rate report")
        p.add_argument("--n", type=parse_n, default=10**5)
        p.add_argument("--gamma", type=parse_gamma, default=0.05)
        if name == "rate":
            p.add_argument(
                "--method", choices=("smoothed", "nosmooth", "asymptotic", "qkr"), default="smoothed"
            )
        p.add_argument("--alpha-beta", type=_positive(float), default=None, help="QKR weight window beta")
        p.add_argument("--json", action="store_true", help="machine-readable output")
        common(p, workers=False)
        p.set_defaults(func=fn)

    p = sub.add_parser("curve", help="rate curves as CSV")
    p.add_argument("--gamma-min", type=parse_gamma, default=0.001)
    p.add_argument("--gamma-max", type=parse_gamma, default=0.15)
    p.add_argument("--steps", type=int, default=150)
    p.add_argument("--n", type=parse_n_list, default=(10**5, 10**6, 10**7), help="comma-separated")
    p.add_argument("--method", default="smoothed,nosmooth,asymptotic", help="comma-separated subset of "
                   "smoothed,nosmooth,asymptotic,qkr")
    p.add_argument("--nosmooth-n", type=parse_n_list, default=None,
                   help="n values for the no-smoothing curve (default: smallest --n)")
    p.add_argument("--alpha-beta", type=_positive(float), default=None)
    p.add_argument("--out", default=None, help="CSV path (default stdout)")
    p.add_argument("--plot", default=None, help="also render the curves to this image file")
    common(p)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("fig1", help="reference rate figure as SVG")
    p.add_argument("--out", default="fig1.svg")
    p.add_argument("--csv", default=None, help="also write the plotted data")
    common(p)
    p.set_defaults(func=cmd_fig1)

    p = sub.add_parser("verify", help="run invariant suites")
    p.add_argument("suite", nargs="?", choices=(*verify.SUITES, "all"), default="all")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-tallies", type=_positive(int), default=None, help="enumeration guard override")
    common(p)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "curve":
            _curve_spec(args)  # validate before doing any work
        return args.func(args)
    except DomainError as exc:
        if args.command == "curve":
            parser.error(str(exc))
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CapacityError as exc:
        print(f"error: {exc}; raise --max-tallies to override", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
