"""Rate curves: sampling, CSV emission and matplotlib figures."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .qkd import RatePoint, rate_point
from .qkr import qkr_report

CSV_HEADER = ("gamma", "n", "epsilon", "method", "ell", "rate")
METHODS = ("smoothed", "nosmooth", "asymptotic", "qkr")


@dataclass(frozen=True)
class CurveSpec:
    gamma_min: float
    gamma_max: float
    steps: int
    n_list: tuple[int, ...]
    epsilon: float
    methods: tuple[str, ...] = ("smoothed", "nosmooth", "asymptotic")
    #: n values for the no-smoothing curve; ``None`` means the smallest n only,
    #: which is how the reference figure draws it.
    nosmooth_n: tuple[int, ...] | None = None
    beta: float | None = None

    def __post_init__(self):
        if not 0 <= self.gamma_min < self.gamma_max < 2.0 / 3.0:
            raise DomainError("need 0 <= gamma_min < gamma_max < 2/3")
        if self.steps < 2:
            raise DomainError("need at least 2 steps")
        if not self.n_list:
            raise DomainError("need at least one n")
        bad = set(self.methods) - set(METHODS)
        if bad:
            raise DomainError(f"unknown methods {sorted(bad)}")

    def gammas(self) -> np.ndarray:
        return np.linspace(self.gamma_min, self.gamma_max, self.steps)


FIG1_SPEC = CurveSpec(0.001, 0.15, 150, (10**5, 10**6, 10**7), 2.0**-128)


@dataclass
class Curve:
    method: str
    n: int | None
    points: list[RatePoint] = field(default_factory=list)

    @property
    def label(self) -> str:
        if self.method == "asymptotic":
            return "asymptotic"
        exp = round(math.log10(self.n))
        n_txt = f"n = 10{_sup(exp)}" if 10**exp == self.n else f"n = {self.n}"
        if self.method == "nosmooth":
            return f"no smoothing, {n_txt}"
        if self.method == "qkr":
            return f"QKR, {n_txt}"
        return n_txt


_SUPERSCRIPT = str.maketrans("-0123456789", "\u207b\u2070\u00b9\u00b2\u00b3\u2074\u2075\u2076\u2077\u2078\u2079")


def _sup(k: int) -> str:
    return str(k).translate(_SUPERSCRIPT)


def _qkr_point(n, gamma, epsilon, beta):
    r = qkr_report(n, gamma, epsilon, beta)
    return RatePoint(gamma, n, epsilon, r.ell, r.rate, "qkr")


def _point(args) -> RatePoint:
    method, n, gamma, epsilon, beta = args
    if method == "asymptotic":
        return rate_point(1, gamma, epsilon, "asymptotic")
    if gamma == 0 and method in ("smoothed", "qkr"):
        return RatePoint(gamma, n, epsilon, math.nan, math.nan, method)
    if method == "qkr":
        try:
            return _qkr_point(n, gamma, epsilon, beta)
        except DomainError:
            return RatePoint(gamma, n, epsilon, math.nan, math.nan, method)
    return rate_point(n, gamma, epsilon, method)


def curve_jobs(spec: CurveSpec) -> list[tuple[str, int | None]]:
    jobs = []
    for method in spec.methods:
        if method == "asymptotic":
            jobs.append((method, None))
        elif method == "nosmooth":
            ns = spec.nosmooth_n if spec.nosmooth_n is not None else (min(spec.n_list),)
            jobs.extend((method, n) for n in ns)
        else:
            jobs.extend((method, n) for n in spec.n_list)
    return jobs


def compute_curves(spec: CurveSpec, workers: int = 1) -> list[Curve]:
    """Evaluate every curve; output is identical for any ``workers``."""
    gammas = spec.gammas().tolist()
    jobs = curve_jobs(spec)
    args = [(m, n, g, spec.epsilon, spec.beta) for m, n in jobs for g in gammas]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            points = list(pool.map(_point, args, chunksize=max(1, len(args) // (4 * workers))))
    else:
        points = [_point(a) for a in args]
    curves = []
    for k, (m, n) in enumerate(jobs):
        curves.append(Curve(m, n, points[k * len(gammas) : (k + 1) * len(gammas)]))
    return curves


def _fmt(x: float) -> str:
    if isinstance(x, float) and not math.isfinite(x):
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return f"{x:.17g}"


def curves_to_csv(curves: list[Curve]) -> str:
    """CSV text, one row per (gamma, n, method); asymptotic rows carry ``n = inf``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for c in curves:
        for p in c.points:
            n = "inf" if c.method == "asymptotic" else str(p.n)
            ell = "nan" if c.method == "asymptotic" else _fmt(p.ell)
            w.writerow([_fmt(p.gamma), n, _fmt(p.epsilon), c.method, ell, _fmt(p.rate)])
    return buf.getvalue()


def write_csv(curves: list[Curve], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(curves_to_csv(curves))


# -- figures --------------------------------------------------------------------

_STYLE = {
    "smoothed": {"linestyle": "-"},
    "asymptotic": {"linestyle": ":", "color": "black"},
    "nosmooth": {"linestyle": "--", "color": "0.35"},
    "qkr": {"linestyle": "-."},
}
_ORDER = {"smoothed": 0, "asymptotic": 1, "nosmooth": 2, "qkr": 3}


def _eps_label(epsilon: float) -> str:
    e = math.log2(epsilon)
    if abs(e - round(e)) < 1e-9:
        return f"\u03b5 = 2{_sup(int(round(e)))}"
    return f"\u03b5 = {epsilon:.3g}"


def render_figure(curves: list[Curve], path, epsilon: float, xmax: float | None = None) -> None:
    """Rate against QBER, solid smoothed / dotted asymptotic / dashed no-smoothing.

    The SVG is written with a fixed hash salt and no date so reruns are
    byte-identical.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    rc = {
        "svg.hashsalt": "sixstate",
        "svg.fonttype": "none",
        "font.size": 11,
        "axes.linewidth": 0.8,
        "lines.linewidth": 1.4,
    }
    with plt.rc_context(rc):
        fig, ax = plt.subplots(figsize=(7.0, 4.2))
        colors = iter(plt.rcParams["axes.prop_cycle"].by_key()["color"])
        for c in sorted(curves, key=lambda c: (_ORDER[c.method], c.n or 0)):
            style = dict(_STYLE[c.method])
            if "color" not in style:
                style["color"] = next(colors)
            xs = [p.gamma for p in c.points]
            ys = [p.rate for p in c.points]
            ax.plot(xs, ys, label=c.label, **style)
        hi = xmax if xmax is not None else max(p.gamma for c in curves for p in c.points)
        ax.set_xlim(0, hi)
        ax.set_ylim(0, 1)
        ax.set_xlabel("QBER")
        ax.set_ylabel("Rate")
        ax.set_title(_eps_label(epsilon))
        ax.legend(frameon=False, fontsize=9)
        fig.tight_layout()
        fmt = str(path).rsplit(".", 1)[-1].lower()
        meta = {"Date": None} if fmt == "svg" else {}
        fig.savefig(path, metadata=meta)
        plt.close(fig)
