import pytest
from hypothesis import given
from hypothesis import strategies as st

from sawlab.lattice import (
    ORIGIN,
    LatticeKind,
    Site,
    Walk,
    WalkClass,
    in_class,
    is_bridge,
    is_lattice_symmetry,
    is_polygon_return,
    is_worm,
    neighbors,
    symmetry_group,
    transform,
)

SQ, TRI, TWO = LatticeKind.SQUARE, LatticeKind.TRIANGULAR, LatticeKind.TWO_LAYER


def test_coordination():
    assert (SQ.coordination, TRI.coordination, TWO.coordination) == (4, 6, 5)


def test_neighbors_square_order():
    assert neighbors(SQ, ORIGIN) == [Site(1, 0), Site(-1, 0), Site(0, 1), Site(0, -1)]


def test_neighbors_triangular_axial():
    got = [(s.x, s.y) for s in neighbors(TRI, ORIGIN)]
    assert got == [(1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1)]


def test_neighbors_two_layer():
    got = neighbors(TWO, Site(2, 3, 1))
    assert got == [Site(3, 3, 1), Site(1, 3, 1), Site(2, 4, 1), Site(2, 2, 1), Site(2, 3, 0)]


@pytest.mark.parametrize("lattice", [SQ, TRI])
def test_planar_rejects_layer(lattice):
    with pytest.raises(ValueError):
        neighbors(lattice, Site(0, 0, 1))


def test_two_layer_rejects_bad_layer():
    with pytest.raises(ValueError):
        neighbors(TWO, Site(0, 0, 2))


coords = st.integers(-50, 50)


@given(st.sampled_from(list(LatticeKind)), coords, coords, coords, coords, st.integers(0, 1))
def test_neighbors_distinct_and_translation_equivariant(lattice, x, y, tx, ty, layer):
    layer = layer if not lattice.planar else 0
    s = Site(x, y, layer)
    nb = neighbors(lattice, s)
    assert len(nb) == lattice.coordination == len(set(nb))
    moved = neighbors(lattice, Site(x + tx, y + ty, layer))
    assert moved == [Site(n.x + tx, n.y + ty, n.layer) for n in nb]


def test_walk_validation():
    with pytest.raises(ValueError):
        Walk(SQ, (ORIGIN, Site(2, 0)))
    with pytest.raises(ValueError):
        Walk.from_steps(SQ, "ENWS")  # revisits the origin
    with pytest.raises(ValueError):
        Walk(SQ, (Site(1, 0),))


def test_worm_examples():
    assert is_worm(Walk.from_steps(SQ, "N"))
    assert not is_worm(Walk.from_steps(SQ, "E"))
    w = Walk.from_steps(SQ, "ENW")
    assert w.end == Site(0, 1) and is_worm(w)
    with pytest.raises(ValueError):
        is_worm(Walk(SQ, (ORIGIN,)))
    with pytest.raises(ValueError):
        is_worm(Walk.from_steps(TWO, "V"))


def test_bridge_examples():
    assert is_bridge(Walk.from_steps(SQ, "E"))
    assert not is_bridge(Walk.from_steps(SQ, "N"))
    assert is_bridge(Walk.from_steps(SQ, "EN"))
    assert not is_bridge(Walk.from_steps(SQ, "EENW"))  # endpoint below the max x
    assert is_bridge(Walk.from_steps(SQ, "ENE"))


def test_polygon_examples():
    assert is_polygon_return(Walk.from_steps(SQ, "ENW"))
    assert not is_polygon_return(Walk.from_steps(SQ, "EE"))
    w = Walk.from_steps(TRI, ["E", "NW"])
    assert w.end == Site(0, 1) and is_polygon_return(w)
    with pytest.raises(ValueError):
        is_polygon_return(Walk.from_steps(SQ, "E"))


def _random_walk(lattice, choices):
    cur, sites = ORIGIN, [ORIGIN]
    for c in choices:
        free = [n for n in neighbors(lattice, cur) if n not in sites]
        if not free:
            break
        cur = free[c % len(free)]
        sites.append(cur)
    return Walk(lattice, tuple(sites))


@given(st.sampled_from([SQ, TRI]), st.lists(st.integers(0, 5), min_size=1, max_size=30))
def test_reversal_preserves_worm(lattice, choices):
    w = _random_walk(lattice, choices)
    assert is_worm(w) == is_worm(w.reversed())
    assert w.reversed().reversed() == w


@given(st.sampled_from([SQ, TRI]), st.sampled_from(list(WalkClass)),
       st.lists(st.integers(0, 5), min_size=2, max_size=20))
def test_symmetry_groups_preserve_class(lattice, cls, choices):
    w = _random_walk(lattice, choices)
    if w.length < 2:
        return
    for g in symmetry_group(lattice, cls):
        image = Walk(lattice, tuple(transform(g, s) for s in w.sites))
        assert in_class(image, cls) == in_class(w, cls)


@pytest.mark.parametrize("lattice,order", [(SQ, 8), (TRI, 12)])
def test_full_group_is_point_group(lattice, order):
    group = symmetry_group(lattice, WalkClass.SAW)
    assert len(set(group)) == order
    assert all(is_lattice_symmetry(lattice, g) for g in group)
