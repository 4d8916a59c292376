"""Coefficient-level analysis of count series.

Inequality checks (super-multiplicativity, log-convexity) are done in exact
integer arithmetic. Ratios are formed as exact fractions and converted to
float once, so they are correctly rounded even when the counts exceed 2**53.
"""
from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction

from .enumeration import BivariateCounts, CountSeries

PARITIES = ("all", "odd", "even")


@dataclass(frozen=True)
class ReferenceConstants:
    mu_square: float = 2.63815853032790
    mu_square_err: float = 3e-14
    mu_triangular: float = 4.15079
    gamma: Fraction = Fraction(43, 32)
    nu: Fraction = Fraction(3, 4)

    @property
    def gamma_w(self) -> Fraction:
        return self.gamma - self.nu

    @property
    def kappa(self) -> float:
        return math.log(self.mu_square)

    @property
    def z_c(self) -> float:
        return 1.0 / self.mu_square


REFERENCE = ReferenceConstants()

# Growth estimates for the two-layer lattice at vertical fugacity p, as
# reported alongside the original enumeration data.
PUBLISHED_TWO_LAYER_GROWTH = {0.02: 2.694, 0.05: 2.746, 0.10: 2.800, 0.15: 2.865}


def _contiguous(series) -> dict[int, int]:
    if isinstance(series, Mapping):
        data = {int(n): series[n] for n in series}
    else:
        data = {n: v for n, v in enumerate(series, start=1)}
    keys = sorted(data)
    if keys and keys != list(range(keys[0], keys[-1] + 1)):
        raise ValueError("series indices must be contiguous")
    return data


# --------------------------------------------------------------------------
# ratios


@dataclass(frozen=True)
class RatioRow:
    n: int
    t: float | None  # c_n / c_{n-step}
    r: float | None  # c_{n+step} c_{n-step} / c_n^2
    r_minus_one: float | None

    @property
    def inv_n(self) -> float:
        return 1.0 / self.n

    @property
    def inv_n2(self) -> float:
        return 1.0 / (self.n * self.n)


@dataclass(frozen=True)
class RatioReport:
    step: int
    rows: tuple[RatioRow, ...]
    undefined: tuple[int, ...]  # n where r_n has a zero denominator
    warnings: tuple[str, ...] = ()

    def row(self, n: int) -> RatioRow:
        for r in self.rows:
            if r.n == n:
                return r
        raise KeyError(n)

    def points(self, transform: str = "inv_n2", n_range: tuple[int, int] | None = None):
        """(n, x, r_n - 1) for defined rows, x = 1/n or 1/n^2."""
        out = []
        for row in self.rows:
            if row.r is None:
                continue
            if n_range and not n_range[0] <= row.n <= n_range[1]:
                continue
            x = row.inv_n2 if transform == "inv_n2" else row.inv_n
            out.append((row.n, x, row.r_minus_one))
        return out


def ratio_of_ratios(series, step: int = 2) -> RatioReport:
    """t_n = c_n/c_{n-s} and r_n = c_{n+s} c_{n-s} / c_n^2, s = ``step``.

    The default step of two sidesteps the parity oscillation that the
    singularity at -1/mu causes on loose-packed lattices.
    """
    if step not in (1, 2):
        raise ValueError("step must be 1 or 2")
    # floats are converted exactly, so the only rounding is the final division
    c = {n: Fraction(v) for n, v in _contiguous(series).items()}
    if len(c) < 2 * step + 1:
        raise ValueError(f"need at least {2 * step + 1} terms")
    lo, hi = min(c), max(c)
    rows, undefined = [], []
    for n in range(lo + step, hi + 1):
        t = c[n] / c[n - step] if c[n - step] != 0 else None
        r = rm1 = None
        if n + step <= hi:
            num = c[n + step] * c[n - step]
            den = c[n] * c[n]
            if den == 0:
                undefined.append(n)
            else:
                r = float(num / den)
                rm1 = float((num - den) / den)
        rows.append(RatioRow(n, None if t is None else float(t), r, rm1))
    warnings = ()
    if step == 1:
        warnings = ("step-1 ratios carry parity oscillation on bipartite lattices",)
    return RatioReport(step, tuple(rows), tuple(undefined), warnings)


# --------------------------------------------------------------------------
# inequalities


@dataclass(frozen=True)
class Violation:
    index: tuple[int, ...]
    slack: int


@dataclass(frozen=True)
class ViolationReport:
    check: str
    parity: str
    violations: tuple[Violation, ...]
    second_differences: CountSeries | None = None
    checked: int = 0

    @property
    def all_pass(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        out = {
            "check": self.check,
            "parity": self.parity,
            "checked": self.checked,
            "all_pass": self.all_pass,
            "violations": [{"index": list(v.index), "slack": str(v.slack)} for v in self.violations],
        }
        if self.second_differences is not None:
            out["second_differences"] = [[k, str(v)] for k, v in self.second_differences.items()]
        return out


def check_supermultiplicative(series) -> ViolationReport:
    """Every pair n <= m, n + m <= n_max, with a_n a_m > a_{n+m}.

    The slack reported is a_n a_m - a_{n+m} (positive means violated).
    """
    a = _contiguous(series)
    if min(a) != 1:
        raise ValueError("super-multiplicativity check needs a series starting at n = 1")
    top = max(a)
    bad, checked = [], 0
    for n in range(1, top // 2 + 1):
        for m in range(n, top - n + 1):
            checked += 1
            slack = a[n] * a[m] - a[n + m]
            if slack > 0:
                bad.append(Violation((n, m), slack))
    return ViolationReport("supermultiplicative", "all", tuple(bad), checked=checked)


def _parity_indices(a: dict[int, int], parity: str) -> tuple[list[int], int]:
    if parity not in PARITIES:
        raise ValueError(f"parity must be one of {PARITIES}")
    if parity == "all":
        return sorted(a), 1
    want = 1 if parity == "odd" else 0
    return [n for n in sorted(a) if n % 2 == want], 2


def check_log_convex(series, parity: str = "all") -> ViolationReport:
    """Log-convexity a_{k-s} a_{k+s} >= a_k^2 along one parity class.

    s = 1 for ``parity="all"``, s = 2 for odd/even subsequences. The full
    slack sequence a_{k-s} a_{k+s} - a_k^2 is returned as
    ``second_differences`` so it can be checked in turn.
    """
    a = _contiguous(series)
    idx, s = _parity_indices(a, parity)
    if len(idx) < 3:
        raise ValueError("need at least three terms of the selected parity")
    bad, diffs = [], []
    for k in idx[1:-1]:
        slack = a[k - s] * a[k + s] - a[k] * a[k]
        diffs.append(slack)
        if slack < 0:
            bad.append(Violation((k,), slack))
    # same-parity indices are not contiguous, so those slacks are re-indexed 1, 2, ...
    second = CountSeries(None, None, tuple(diffs), "derived", start=idx[1] if s == 1 else 1)
    return ViolationReport("log_convex", parity, tuple(bad), second, checked=len(diffs))


def ratio_bounds(series, parity: str = "all") -> dict[int, float]:
    """Same-parity ratio sequence: a_n/a_{n-1}, or sqrt(a_n/a_{n-2}).

    Under log-convexity these increase with n and bound the growth constant
    from below.
    """
    a = _contiguous(series)
    idx, s = _parity_indices(a, parity)
    out = {}
    for n in idx:
        if n - s in a and a[n - s] > 0:
            q = Fraction(a[n], a[n - s])
            out[n] = float(q) if s == 1 else math.sqrt(float(q))
    return out


def mu_lower_bound(series, parity: str = "all") -> float:
    """Largest available same-parity ratio of the series."""
    bounds = ratio_bounds(series, parity)
    if not bounds:
        raise ValueError("not enough terms for a ratio of the selected parity")
    return bounds[max(bounds)]


# --------------------------------------------------------------------------
# fitting and extrapolation


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    rss: float
    n_points: int
    n_range: tuple | None = None


def linear_fit(points: Sequence[tuple[float, float]], n_range: tuple | None = None) -> FitResult:
    """Ordinary least-squares straight line through (x, y) points."""
    if len(points) < 2:
        raise ValueError("need at least two points")
    xs = [float(x) for x, _ in points]
    ys = [float(y) for _, y in points]
    mx = math.fsum(xs) / len(xs)
    my = math.fsum(ys) / len(ys)
    sxx = math.fsum((x - mx) ** 2 for x in xs)
    if sxx == 0.0 or len(set(xs)) < 2:
        raise ValueError("x values are degenerate")
    sxy = math.fsum((x - mx) * (y - my) for x, y in zip(xs, ys))
    slope = sxy / sxx
    intercept = my - slope * mx
    rss = math.fsum((y - intercept - slope * x) ** 2 for x, y in zip(xs, ys))
    return FitResult(slope, intercept, rss, len(xs), n_range)


def ratio_fit(series, n_lo: int, n_hi: int, transform: str = "inv_n2") -> FitResult:
    """Fit r_n - 1 against 1/n or 1/n^2 over n_lo <= n <= n_hi."""
    pts = ratio_of_ratios(series).points(transform, (n_lo, n_hi))
    return linear_fit([(x, y) for _, x, y in pts], (n_lo, n_hi))


def neville_table(xs: Sequence[float], ys: Sequence[float]) -> list[list[float]]:
    """Polynomial extrapolation to x = 0; column j uses j+1 consecutive points."""
    table = [list(map(float, ys))]
    col = table[0]
    for j in range(1, len(xs)):
        col = [(xs[i + j] * col[i] - xs[i] * col[i + 1]) / (xs[i + j] - xs[i])
               for i in range(len(col) - 1)]
        table.append(col)
    return table


@dataclass(frozen=True)
class GrowthEstimate:
    limit: float
    table: tuple[tuple[float, ...], ...]  # Neville columns, deepest last
    ratios: tuple[tuple[int, float], ...]  # (n, ratio) tail used


MAX_NEVILLE_DEPTH = 4


def estimate_growth(values, step: int = 2, depth: int = 3) -> GrowthEstimate:
    """Extrapolate the growth constant of a positive sequence.

    Ratios rho_n = (a_n / a_{n-step})^(1/step) are extrapolated in 1/n with a
    Neville table. With ``step=2`` only indices of the same parity as the
    last term enter the table, so any residual odd/even oscillation cannot
    leak into the extrapolation.
    """
    a = _contiguous(values)
    if len(a) < 8:
        raise ValueError("need at least 8 terms")
    if any(v <= 0 for v in a.values()):
        raise ValueError("terms must be positive")
    if not 1 <= depth <= MAX_NEVILLE_DEPTH:
        raise ValueError(f"depth must be between 1 and {MAX_NEVILLE_DEPTH}")
    top = max(a)
    ns = [n for n in sorted(a) if n - step in a]
    if step == 2:
        ns = [n for n in ns if n % 2 == top % 2]
    ns = ns[-(depth + 1):]
    ratios = []
    for n in ns:
        num, den = a[n], a[n - step]
        q = Fraction(num, den) if isinstance(num, int) and isinstance(den, int) else num / den
        ratios.append((n, float(q) ** (1.0 / step)))
    table = neville_table([1.0 / n for n, _ in ratios], [r for _, r in ratios])
    return GrowthEstimate(table[-1][-1], tuple(tuple(c) for c in table), tuple(ratios))


# --------------------------------------------------------------------------
# two-layer lattice


WEIGHTINGS = ("fugacity", "bernoulli")


def weighted_two_layer_series(bi: BivariateCounts, p: float, weighting: str = "fugacity") -> dict[int, float]:
    """W_n(p) from the (n, k)-resolved two-layer counts.

    ``fugacity``:  W_n = sum_k c[n,k] p^k
    ``bernoulli``: W_n = sum_k c[n,k] p^k (1-p)^(n-k)

    Both are evaluated exactly from the binary value of ``p`` and rounded
    once.
    """
    if not 0.0 <= p < 1.0:
        raise ValueError("p must lie in [0, 1)")
    if weighting not in WEIGHTINGS:
        raise ValueError(f"weighting must be one of {WEIGHTINGS}")
    fp = Fraction(p)
    out = {}
    for n in range(1, bi.n_max + 1):
        total = Fraction(0)
        for k, c in enumerate(bi.row(n)):
            if c:
                w = fp ** k
                if weighting == "bernoulli":
                    w *= (1 - fp) ** (n - k)
                total += c * w
        out[n] = float(total)
    return out


@dataclass(frozen=True)
class KappaEstimate:
    p: float
    weighted: dict[int, float] = field(repr=False)
    growth: float  # estimate of exp(kappa(p))
    diagnostics: GrowthEstimate = field(repr=False)

    @property
    def kappa(self) -> float:
        return math.log(self.growth)


def estimate_kappa(bi: BivariateCounts, p: float, weighting: str = "fugacity", depth: int = 3) -> KappaEstimate:
    w = weighted_two_layer_series(bi, p, weighting)
    if p == 0.0:
        # exact integers give a correctly rounded ratio
        w_exact = dict(zip(range(1, bi.n_max + 1), bi.planar().values))
        est = estimate_growth(w_exact, depth=depth)
    else:
        est = estimate_growth(w, depth=depth)
    return KappaEstimate(p, w, est.limit, est)


def kappa_fit(growth_by_p: Mapping[float, float], kappa: float | None = None) -> FitResult:
    """Least-squares slope of kappa(p) - kappa against -p log p.

    ``growth_by_p`` maps p to an estimate of exp(kappa(p)).
    """
    if len(growth_by_p) < 3:
        raise ValueError("need estimates at three or more values of p")
    k0 = REFERENCE.kappa if kappa is None else kappa
    pts = sorted((-p * math.log(p), math.log(g) - k0) for p, g in growth_by_p.items() if 0 < p < 1)
    return linear_fit(pts)
