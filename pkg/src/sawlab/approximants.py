"""Differential approximants.

An order-K approximant to F(z) = sum a_n z^n is a set of polynomials
Q_0..Q_K and P with

    sum_k Q_k(z) (z d/dz)^k F(z) = P(z)   + O(z^M),

M being the number of series terms used. Roots of Q_K locate singularities
of the approximating ODE solution; the local exponent follows from the
indicial equation there. With F ~ (1 - z/z_c)^(-lambda), a simple root z_c of
Q_K gives

    lambda = Q_{K-1}(z_c) / (z_c Q_K'(z_c)) - (K - 1).

A biased approximant writes Q_K = (1 - z/z_c) R(z) for a known z_c so the
critical point is exact by construction.

The linear system is built for the rescaled variable u = z / s, where s is a
rough radius of convergence, and columns are equilibrated before solving.
"""
from __future__ import annotations

import itertools
import statistics
from dataclasses import dataclass, field

import numpy as np


class DefectiveApproximant(ValueError):
    """The linear system for the requested degrees is (numerically) singular."""


class DegenerateSingularity(ValueError):
    pass


@dataclass(frozen=True)
class ApproximantSpec:
    order: int
    q_degrees: tuple[int, ...]  # deg Q_0, ..., deg Q_K
    p_degree: int = -1  # -1 means homogeneous (no P)
    bias: float | None = None
    n_terms: int | None = None  # None: exactly as many terms as unknowns

    def __post_init__(self):
        if self.order not in (1, 2):
            raise ValueError("order must be 1 or 2")
        if len(self.q_degrees) != self.order + 1:
            raise ValueError("need one degree per Q_0..Q_K")
        if min(self.q_degrees) < 0 or self.p_degree < -1:
            raise ValueError("degrees must be non-negative")
        if self.bias is not None and self.q_degrees[-1] < 1:
            raise ValueError("a biased Q_K needs degree >= 1")

    @property
    def unknowns(self) -> int:
        # Q_K(0) = 1 (or R(0) = 1 when biased) fixes the normalisation.
        free_top = self.q_degrees[-1] - (1 if self.bias is not None else 0)
        return sum(d + 1 for d in self.q_degrees[:-1]) + free_top + self.p_degree + 1

    @property
    def terms_used(self) -> int:
        return self.n_terms if self.n_terms is not None else self.unknowns


@dataclass
class ApproximantResult:
    spec: ApproximantSpec
    q: list[np.ndarray]  # coefficients of Q_0..Q_K in z, lowest order first
    p: np.ndarray
    singularities: np.ndarray  # roots of Q_K
    exponents: np.ndarray  # lambda at each root (nan where undefined)
    condition: float
    residual: float  # max |equation residual| relative to the coefficient scale
    scale: float = field(repr=False, default=1.0)

    def nearest(self, z0: complex) -> tuple[complex, float]:
        """Singularity closest to ``z0`` and its exponent."""
        i = int(np.argmin(np.abs(self.singularities - z0)))
        return self.singularities[i], _real_if_close(self.exponents[i])

    def physical(self) -> tuple[complex, float]:
        """Bias point if biased, else the root nearest the positive real axis origin."""
        if self.spec.bias is not None:
            return self.nearest(self.spec.bias)
        real = [z for z in self.singularities if z.real > 0 and abs(z.imag) < 1e-8 * abs(z)]
        pool = real or list(self.singularities)
        z = min(pool, key=abs)
        return self.nearest(z)


def _real_if_close(v):
    v = complex(v)
    if np.isnan(v.real) or abs(v.imag) <= 1e-10 * max(1.0, abs(v)):
        return float(v.real)
    return v


def _poly_eval(c: np.ndarray, z):
    return np.polynomial.polynomial.polyval(z, c)


def _poly_der(c: np.ndarray) -> np.ndarray:
    return np.polynomial.polynomial.polyder(c) if len(c) > 1 else np.zeros(1)


def _radius(coeffs: np.ndarray, bias: float | None) -> float:
    if bias is not None:
        return abs(bias)
    nz = [i for i in range(len(coeffs)) if coeffs[i] != 0]
    if len(nz) >= 3:
        i, j = nz[-1], nz[-3]
        ratio = abs(coeffs[i] / coeffs[j]) ** (1.0 / (i - j))
        if np.isfinite(ratio) and ratio > 0:
            return 1.0 / ratio
    return 1.0


def _roots(c: np.ndarray) -> np.ndarray:
    """Companion-matrix roots refined by Newton iteration."""
    c = np.trim_zeros(np.asarray(c, dtype=float), "b")
    if len(c) < 2:
        return np.zeros(0, dtype=complex)
    roots = np.polynomial.polynomial.polyroots(c).astype(complex)
    dc = _poly_der(c)
    for i, z in enumerate(roots):
        for _ in range(20):
            d = _poly_eval(dc, z)
            if d == 0:
                break
            step = _poly_eval(c, z) / d
            z = z - step
            if abs(step) <= 1e-15 * max(1.0, abs(z)):
                break
        roots[i] = z
    return roots


def indicial_exponent(q: list[np.ndarray], z: complex) -> float | complex:
    """Exponent lambda at a simple root z of Q_K, for F ~ (1 - z/z_c)^(-lambda)."""
    K = len(q) - 1
    dq = _poly_der(q[K])
    d = _poly_eval(dq, z)
    if abs(d) <= 1e-12 * max(1.0, float(np.max(np.abs(q[K])))) * max(1.0, abs(z)) ** len(q[K]):
        raise DegenerateSingularity(f"{z} is a multiple root of the leading polynomial")
    return _real_if_close(_poly_eval(q[K - 1], z) / (z * d) - (K - 1))


def exponent_at_singularity(result: ApproximantResult, z) -> float | complex:
    return indicial_exponent(result.q, z)


def fit_approximant(coefficients, spec: ApproximantSpec, rcond: float = 1e-15) -> ApproximantResult:
    """Fit the approximant ``spec`` to ``coefficients`` a_0, a_1, ...

    Raises DefectiveApproximant when the equilibrated system has condition
    number above 1/rcond.
    """
    a = np.array([float(x) for x in coefficients], dtype=float)
    M = spec.terms_used
    if M > len(a):
        raise ValueError(f"approximant needs {M} terms, series has {len(a)}")
    if M < spec.unknowns:
        raise ValueError("fewer terms than unknowns")
    if not np.any(a[:M]):
        raise ValueError("series is identically zero")
    K = spec.order
    s = _radius(a[:M], spec.bias)
    b = a[:M] * s ** np.arange(M)
    b /= np.max(np.abs(b))
    j = np.arange(M)
    cols, labels = [], []  # labels: (kind, k, i)

    def shifted(k, i):
        col = np.zeros(M)
        col[i:] = (j[i:] - i) ** k * b[: M - i]
        return col

    rhs = np.zeros(M)
    for k in range(K):
        for i in range(spec.q_degrees[k] + 1):
            cols.append(shifted(k, i))
            labels.append(("q", k, i))
    if spec.bias is None:
        rhs -= shifted(K, 0)
        for i in range(1, spec.q_degrees[K] + 1):
            cols.append(shifted(K, i))
            labels.append(("q", K, i))
    else:
        # Q_K(u) = (1 - u/u_c) R(u), R(0) = 1; u_c = bias / s = +-1
        uc = spec.bias / s
        rhs -= shifted(K, 0) - shifted(K, 1) / uc
        for i in range(1, spec.q_degrees[K]):
            cols.append(shifted(K, i) - shifted(K, i + 1) / uc)
            labels.append(("r", K, i))
    for i in range(spec.p_degree + 1):
        col = np.zeros(M)
        col[i] = -1.0
        cols.append(col)
        labels.append(("p", 0, i))
    A = np.column_stack(cols) if cols else np.zeros((M, 0))
    norms = np.linalg.norm(A, axis=0)
    norms[norms == 0] = 1.0
    As = A / norms
    sv = np.linalg.svd(As, compute_uv=False)
    cond = float(sv[0] / sv[-1]) if sv.size and sv[-1] > 0 else float("inf")
    if not sv.size or sv[-1] <= rcond * sv[0]:
        raise DefectiveApproximant(f"rank-deficient system (condition {cond:.3g})")
    if As.shape[0] == As.shape[1]:
        x = np.linalg.solve(As, rhs)
    else:
        x = np.linalg.lstsq(As, rhs, rcond=None)[0]
    x = x / norms
    residual = float(np.max(np.abs(A @ x - rhs)))

    qu = [np.zeros(d + 1) for d in spec.q_degrees]
    pu = np.zeros(max(spec.p_degree + 1, 1))
    if spec.bias is None:
        qu[K][0] = 1.0
    else:
        uc = spec.bias / s
        r = np.zeros(spec.q_degrees[K])
        r[0] = 1.0
        for (kind, k, i), v in zip(labels, x):
            if kind == "r":
                r[i] = v
        qu[K] = np.polynomial.polynomial.polymul(r, [1.0, -1.0 / uc])
    for (kind, k, i), v in zip(labels, x):
        if kind == "q":
            qu[k][i] = v
        elif kind == "p":
            pu[i] = v
    # back to z: a polynomial in u = z/s has z-coefficients c_i / s^i
    q = [c / s ** np.arange(len(c)) for c in qu]
    p = pu / s ** np.arange(len(pu))
    roots = _roots(qu[K]) * s
    if spec.bias is not None:
        # the factor (1 - z/z_c) is exact; pin its root
        i = int(np.argmin(np.abs(roots - spec.bias)))
        roots[i] = spec.bias
    exps = []
    for z in roots:
        try:
            exps.append(indicial_exponent(q, z))
        except DegenerateSingularity:
            exps.append(np.nan)
    return ApproximantResult(spec, q, p, roots, np.array(exps, dtype=complex), cond, residual, s)


def series_coefficients(series, constant_term: int = 1) -> list[int]:
    """Coefficient list a_0, a_1, ... of a count series (a_0 supplied)."""
    n_max = max(series)
    return [constant_term] + [series[n] for n in range(1, n_max + 1)]


def near_diagonal_specs(order: int, max_terms: int, bias: float | None = None,
                        p_degrees=(0, 1, 2), min_terms: int = 20):
    """Degree choices with |deg Q_i - deg Q_j| <= 1 and small deg P."""
    out = []
    for N in range(1, max_terms):
        for offs in itertools.product((-1, 0, 1), repeat=order):
            degs = tuple(N + o for o in offs) + (N,)
            if min(degs) < 1:
                continue
            for L in p_degrees:
                spec = ApproximantSpec(order, degs, L, bias)
                if min_terms <= spec.unknowns <= max_terms:
                    out.append(spec)
    return out


@dataclass
class ExponentSweep:
    estimates: list[tuple[int, float]]  # (terms used, exponent) per successful fit
    failures: int

    @property
    def values(self) -> list[float]:
        return [e for _, e in self.estimates]

    @property
    def median(self) -> float:
        return statistics.median(self.values)

    @property
    def iqr(self) -> float:
        q = statistics.quantiles(self.values, n=4)
        return q[2] - q[0]


def exponent_sweep(coefficients, order: int, bias: float | None, specs=None,
                   min_terms: int = 20, p_degrees=(0, 1, 2)) -> ExponentSweep:
    """Exponent at the physical singularity across a family of approximants.

    Fits whose physical singularity is complex or whose exponent is not
    finite are counted as failures (defective approximants).
    """
    if specs is None:
        specs = near_diagonal_specs(order, len(coefficients), bias, p_degrees, min_terms)
    est, fail = [], 0
    for spec in specs:
        try:
            res = fit_approximant(coefficients, spec)
            z, lam = res.physical()
        except (DefectiveApproximant, DegenerateSingularity, np.linalg.LinAlgError):
            fail += 1
            continue
        if isinstance(lam, complex) or not np.isfinite(lam):  # complex or undefined
            fail += 1
            continue
        if bias is None and abs(z.imag) > 1e-8 * abs(z):
            fail += 1
            continue
        est.append((spec.terms_used, float(lam)))
    return ExponentSweep(sorted(est), fail)
