import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_force, brute_force_two_layer, square_saw_by_first_turn
from sawlab.enumeration import (
    BivariateCounts,
    CountSeries,
    EnumConfig,
    EnumerationOverflowError,
    enumerate_series,
    enumerate_two_layer,
    enumerate_worms,
    raw_worm_counts,
)
from sawlab.lattice import LatticeKind, WalkClass

SQ, TRI, TWO = LatticeKind.SQUARE, LatticeKind.TRIANGULAR, LatticeKind.TWO_LAYER
SQUARE_SAW = [4, 12, 36, 100, 284, 780, 2172, 5916, 16268, 44100, 120292, 324932, 881500, 2374444]


def test_square_saw_small():
    assert list(enumerate_series(SQ, WalkClass.SAW, EnumConfig(4)).values) == [4, 12, 36, 100]


def test_triangular_saw_one_step():
    assert list(enumerate_series(TRI, WalkClass.SAW, EnumConfig(1)).values) == [6]


def test_worm_examples():
    assert list(enumerate_worms(SQ, EnumConfig(5)).values) == [1, 1, 3, 7, 19]
    assert list(enumerate_worms(TRI, EnumConfig(4)).values) == [1, 3, 11, 41]
    assert raw_worm_counts(SQ, EnumConfig(3))[2] == 6


@pytest.mark.parametrize("lattice,n_max", [(SQ, 9), (TRI, 6)])
@pytest.mark.parametrize("cls", list(WalkClass))
def test_against_brute_force(lattice, cls, n_max):
    expected = brute_force(lattice, cls, n_max)
    if cls is WalkClass.WORM:
        expected = [e // 2 for e in expected]
    for reduce in (True, False):
        cfg = EnumConfig(n_max, prefix_depth=3, symmetry_reduction=reduce)
        assert list(enumerate_series(lattice, cls, cfg).values) == expected


def test_square_saw_first_turn_oracle():
    got = enumerate_series(SQ, WalkClass.SAW, EnumConfig(14))
    assert list(got.values) == square_saw_by_first_turn(14) == SQUARE_SAW


def test_full_and_reduced_agree_to_14():
    full = enumerate_series(SQ, WalkClass.SAW, EnumConfig(14, symmetry_reduction=False))
    reduced = enumerate_series(SQ, WalkClass.SAW, EnumConfig(14, symmetry_reduction=True))
    assert full.values == reduced.values


@settings(max_examples=15, deadline=None)
@given(st.sampled_from([SQ, TRI]), st.sampled_from(list(WalkClass)), st.integers(1, 7),
       st.booleans(), st.integers(1, 3))
def test_independent_of_schedule(lattice, cls, depth, reduce, threads):
    n_max = 8 if lattice is SQ else 6
    depth = min(depth, n_max)
    ref = enumerate_series(lattice, cls, EnumConfig(n_max, prefix_depth=1, symmetry_reduction=False,
                                                    thread_hint=1))
    got = enumerate_series(lattice, cls, EnumConfig(n_max, depth, reduce, threads))
    assert got.values == ref.values


def test_polygon_parity_square():
    poly = enumerate_series(SQ, WalkClass.POLYGON, EnumConfig(13))
    assert all(poly[n] == 0 for n in poly if n % 2 == 0)
    # 2(n+1) p_{n+1} rooted oriented returns, p = 1, 2, 7, 28, 124, 588 polygons
    assert [poly[n] for n in (3, 5, 7, 9, 11, 13)] == [8, 24, 112, 560, 2976, 16464]


def test_raw_worms_even():
    assert all(r % 2 == 0 for r in raw_worm_counts(SQ, EnumConfig(14)))
    assert all(r % 2 == 0 for r in raw_worm_counts(TRI, EnumConfig(9)))


def test_sub_multiplicative_and_sandwich():
    c = enumerate_series(SQ, WalkClass.SAW, EnumConfig(14))
    w = enumerate_worms(SQ, EnumConfig(14))
    for n in range(1, 15):
        assert w[n] <= c[n]
        for m in range(1, 15 - n):
            assert c[n] * c[m] >= c[n + m]
    assert all(c[n] < c[n + 1] for n in range(1, 14))


def test_two_layer_examples():
    bi = enumerate_two_layer(EnumConfig(10))
    assert bi[1, 1] == 1
    assert bi[2, 1] == 8
    assert [bi[n, 0] for n in range(1, 11)] == SQUARE_SAW[:10]
    assert [list(r) for r in bi.rows[:6]] == brute_force_two_layer(6)


def test_two_layer_schedule_independent():
    a = enumerate_two_layer(EnumConfig(9, prefix_depth=2, symmetry_reduction=False, thread_hint=1))
    b = enumerate_two_layer(EnumConfig(9, prefix_depth=6, thread_hint=3))
    assert a.rows == b.rows
    assert a.totals().values == tuple(sum(r) for r in a.rows)


def test_overflow_refused():
    with pytest.raises(EnumerationOverflowError):
        enumerate_series(SQ, WalkClass.SAW, EnumConfig(60))


@pytest.mark.parametrize("kwargs", [dict(n_max=0), dict(n_max=5, prefix_depth=6),
                                    dict(n_max=5, prefix_depth=0), dict(n_max=5, thread_hint=0)])
def test_bad_config(kwargs):
    with pytest.raises(ValueError):
        EnumConfig(**kwargs)


def test_worms_need_planar():
    with pytest.raises(ValueError):
        enumerate_worms(TWO, EnumConfig(3))


def test_count_series_mapping():
    s = CountSeries(SQ, WalkClass.SAW, (4, 12, 36))
    assert dict(s) == {1: 4, 2: 12, 3: 36}
    assert s.n_max == 3
    with pytest.raises(KeyError):
        s[4]
    b = BivariateCounts(((4, 1), (12, 8, 0)))
    assert b.planar().values == (4, 12)
