import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sawlab import analysis as an
from sawlab.enumeration import BivariateCounts, CountSeries, EnumConfig, enumerate_series
from sawlab.lattice import LatticeKind, WalkClass


def test_reference_constants():
    ref = an.REFERENCE
    assert ref.gamma_w == ref.gamma - ref.nu == Fraction(19, 32)
    assert ref.kappa == pytest.approx(math.log(2.63815853032790), rel=1e-15)
    assert ref.z_c * ref.mu_square == pytest.approx(1.0, rel=1e-15)


# ratios

def test_ratio_of_ratios_worm_n5(square_worms):
    rep = an.ratio_of_ratios(square_worms)
    assert rep.row(5).r == float(Fraction(113 * 3, 19 ** 2))
    assert rep.row(5).r == pytest.approx(0.93906, abs=1e-5)


def test_ratio_of_ratios_geometric_and_linear():
    geo = an.ratio_of_ratios([3 ** n for n in range(1, 30)])
    assert all(r.r == 1.0 for r in geo.rows if r.r is not None)
    lin = an.ratio_of_ratios(list(range(1, 30)))
    for row in lin.rows:
        if row.r is not None:
            assert row.r == pytest.approx((row.n ** 2 - 4) / row.n ** 2, rel=1e-15)


def test_ratio_of_ratios_flags_zero_denominator():
    rep = an.ratio_of_ratios([1, 0, 1, 0, 1, 0, 1])
    assert rep.undefined


def test_ratio_of_ratios_too_short():
    with pytest.raises(ValueError):
        an.ratio_of_ratios([4, 12, 36])


def test_ratio_of_ratios_precision_on_large_integers(square_worms):
    rep = an.ratio_of_ratios(square_worms)
    n = 50
    exact = Fraction(square_worms[n + 2] * square_worms[n - 2], square_worms[n] ** 2)
    assert rep.row(n).r == float(exact)
    assert rep.row(n).r_minus_one == float(exact - 1)


@pytest.mark.parametrize("g", [Fraction(-13, 32), Fraction(11, 32), Fraction(1, 2)])
def test_power_law_correction(g):
    # c_n = mu^n n^g with mu = 1: n^2 (r_n - 1) -> -4g
    vals = {n: n ** float(g) for n in range(1, 205)}
    rep = an.ratio_of_ratios(vals)
    n = 200
    assert n ** 2 * rep.row(n).r_minus_one == pytest.approx(-4 * float(g), rel=0.01)


# inequalities

def test_supermultiplicative_worms(square_worms):
    rep = an.check_supermultiplicative(square_worms)
    assert rep.all_pass
    assert square_worms[1] * square_worms[1] == square_worms[2]  # boundary equality at (1,1)


def test_supermultiplicative_counterexample():
    rep = an.check_supermultiplicative([2, 1])
    assert not rep.all_pass
    assert rep.violations[0].index == (1, 1) and rep.violations[0].slack == 3


def test_log_convex_triangular(tri_worms):
    rep = an.check_log_convex(tri_worms, "all")
    assert rep.all_pass
    assert rep.second_differences[3] == 3 * 41 - 11 ** 2 == 2
    again = an.check_log_convex(rep.second_differences, "all")
    assert not again.all_pass


def test_log_convex_square_parities(square_worms):
    even = an.check_log_convex(square_worms, "even")
    assert [(v.index, v.slack) for v in even.violations] == [((4,), -8)]
    odd = an.check_log_convex(square_worms, "odd")
    assert [(v.index, v.slack) for v in odd.violations] == [((5,), -22)]
    assert all(isinstance(v.slack, int) for v in even.violations + odd.violations)


def test_json_slacks_are_strings(square_worms):
    js = an.check_log_convex(square_worms, "even").to_json()
    assert js["violations"][0]["slack"] == "-8"
    assert all(isinstance(v, str) for _, v in js["second_differences"])


@given(st.lists(st.integers(1, 10 ** 30), min_size=3, max_size=25))
def test_inequality_slacks_exact(values):
    rep = an.check_log_convex(values, "all")
    for v in rep.violations:
        k = v.index[0]
        a = dict(enumerate(values, start=1))
        assert v.slack == a[k - 1] * a[k + 1] - a[k] ** 2 < 0
    sm = an.check_supermultiplicative(values)
    for v in sm.violations:
        n, m = v.index
        assert v.slack == values[n - 1] * values[m - 1] - values[n + m - 1] > 0


# bounds

def test_mu_lower_bounds(square_worms, tri_worms):
    assert 4.1098 <= an.mu_lower_bound(tri_worms, "all") <= 4.1099
    assert 2.6202 <= an.mu_lower_bound(square_worms, "even") <= 2.6204
    assert an.mu_lower_bound([5 ** n for n in range(1, 12)], "all") == 5.0
    with pytest.raises(ValueError):
        an.mu_lower_bound([4], "all")


def test_mu_bound_monotone_in_n_max(tri_worms):
    bounds = [an.mu_lower_bound(tri_worms.truncate(n), "all") for n in range(10, 41)]
    assert all(a <= b for a, b in zip(bounds, bounds[1:]))


# fitting and extrapolation

def test_linear_fit_exact_line():
    fit = an.linear_fit([(x, 3 * x + 1) for x in range(5)])
    assert fit.slope == pytest.approx(3) and fit.intercept == pytest.approx(1)
    assert fit.rss == pytest.approx(0, abs=1e-20)


def test_linear_fit_degenerate():
    with pytest.raises(ValueError):
        an.linear_fit([(1.0, 2.0), (1.0, 3.0)])
    with pytest.raises(ValueError):
        an.linear_fit([(1.0, 2.0)])


def test_worm_ratio_slope(square_worms):
    fit = an.ratio_fit(square_worms, 40, 57, "inv_n2")
    assert abs(fit.slope - 1.625) <= 0.2 * 1.625


def test_estimate_growth_geometric():
    assert an.estimate_growth([3 ** n for n in range(1, 15)]).limit == pytest.approx(3.0, rel=1e-12)


@settings(max_examples=30)
@given(st.floats(1e-6, 1e6))
def test_estimate_growth_scale_invariant(scale):
    vals = [2.0 ** n * n ** 0.3 for n in range(1, 21)]
    a = an.estimate_growth(vals).limit
    b = an.estimate_growth([scale * v for v in vals]).limit
    assert b == pytest.approx(a, rel=1e-12)


def test_estimate_growth_square_saw():
    s = enumerate_series(LatticeKind.SQUARE, WalkClass.SAW, EnumConfig(20))
    est = an.estimate_growth(s)
    assert abs(est.limit - an.REFERENCE.mu_square) < 0.01
    assert len(est.table) == 4 and est.ratios[-1][0] == 20


def test_estimate_growth_rejects():
    with pytest.raises(ValueError):
        an.estimate_growth([1, 2, 3])
    with pytest.raises(ValueError):
        an.estimate_growth([1, 2, 3, 4, 0, 6, 7, 8, 9])
    with pytest.raises(ValueError):
        an.estimate_growth([2 ** n for n in range(1, 20)], depth=5)


# two-layer weighting

BI = BivariateCounts(((4, 1), (12, 8, 0), (36, 40, 4, 0)))


def test_weighted_p_zero_is_planar():
    for w in an.WEIGHTINGS:
        assert an.weighted_two_layer_series(BI, 0.0, w) == {1: 4.0, 2: 12.0, 3: 36.0}


def test_weighted_first_term():
    p = 0.3
    assert an.weighted_two_layer_series(BI, p, "bernoulli")[1] == pytest.approx(4 * (1 - p) + p)
    assert an.weighted_two_layer_series(BI, p, "fugacity")[1] == pytest.approx(4 + p)


@given(st.floats(0.001, 0.999), st.integers(1, 12))
def test_bernoulli_binomial_identity(p, n_max):
    ones = BivariateCounts(tuple(tuple(math.comb(n, k) for k in range(n + 1)) for n in range(1, n_max + 1)))
    w = an.weighted_two_layer_series(ones, p, "bernoulli")
    assert all(v == pytest.approx(1.0, rel=1e-12) for v in w.values())


@given(st.floats(0.001, 0.999))
def test_weighted_bounds(p):
    totals = BI.totals()
    for weighting in an.WEIGHTINGS:
        w = an.weighted_two_layer_series(BI, p, weighting)
        assert all(0 < w[n] <= totals[n] for n in w)


def test_weighted_rejects_p():
    with pytest.raises(ValueError):
        an.weighted_two_layer_series(BI, 1.0)
    with pytest.raises(ValueError):
        an.weighted_two_layer_series(BI, 0.1, "uniform")


def test_kappa_fit_published_values():
    fit = an.kappa_fit(an.PUBLISHED_TWO_LAYER_GROWTH)
    assert fit.slope > 0
    assert 0.2 <= fit.slope <= 0.35


def test_kappa_fit_synthetic():
    k = an.REFERENCE.kappa
    g = {p: math.exp(k - 0.5 * p * math.log(p)) for p in (0.02, 0.05, 0.1, 0.15)}
    fit = an.kappa_fit(g)
    assert fit.slope == pytest.approx(0.5, rel=1e-10)
    assert fit.rss == pytest.approx(0.0, abs=1e-20)


def test_kappa_fit_needs_three():
    with pytest.raises(ValueError):
        an.kappa_fit({0.1: 2.8, 0.2: 2.9})


def test_count_series_input_accepted(square_worms):
    assert isinstance(square_worms, CountSeries)
    assert an.ratio_of_ratios(square_worms).rows[0].n == 3
