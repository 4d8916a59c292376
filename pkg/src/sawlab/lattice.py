"""Lattice geometries, sites, walks and walk-class predicates.

Three lattices are supported:

* ``SQUARE``: the square lattice Z^2.
* ``TRIANGULAR``: the triangular lattice in axial coordinates. The six unit
  steps are (1,0), (-1,0), (0,1), (0,-1), (1,-1), (-1,1); the "x-coordinate"
  of a site is its first axial coordinate.
* ``TWO_LAYER``: two copies of Z^2 (layers 0 and 1) joined by a vertical
  edge between every pair of vertically aligned sites.

Walks are always rooted at the origin (layer 0).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence


class LatticeKind(enum.Enum):
    SQUARE = "square"
    TRIANGULAR = "triangular"
    TWO_LAYER = "two-layer"

    @property
    def coordination(self) -> int:
        return len(_STEPS[self])

    @property
    def planar(self) -> bool:
        return self is not LatticeKind.TWO_LAYER


class WalkClass(enum.Enum):
    SAW = "saw"
    WORM = "worm"
    BRIDGE = "bridge"
    POLYGON = "polygon"


# (dx, dy, vertical) in a fixed order; this order drives traversal order.
_STEPS: dict[LatticeKind, tuple[tuple[int, int, bool], ...]] = {
    LatticeKind.SQUARE: ((1, 0, False), (-1, 0, False), (0, 1, False), (0, -1, False)),
    LatticeKind.TRIANGULAR: (
        (1, 0, False), (-1, 0, False), (0, 1, False),
        (0, -1, False), (1, -1, False), (-1, 1, False),
    ),
    LatticeKind.TWO_LAYER: (
        (1, 0, False), (-1, 0, False), (0, 1, False), (0, -1, False), (0, 0, True),
    ),
}

# Compass names for building walks by hand.
STEP_NAMES: dict[LatticeKind, dict[str, int]] = {
    LatticeKind.SQUARE: {"E": 0, "W": 1, "N": 2, "S": 3},
    LatticeKind.TRIANGULAR: {"E": 0, "W": 1, "N": 2, "S": 3, "SE": 4, "NW": 5},
    LatticeKind.TWO_LAYER: {"E": 0, "W": 1, "N": 2, "S": 3, "V": 4},
}


def steps(lattice: LatticeKind) -> tuple[tuple[int, int, bool], ...]:
    """Step table of ``lattice`` as ``(dx, dy, vertical)`` triples."""
    return _STEPS[lattice]


@dataclass(frozen=True, order=True)
class Site:
    x: int
    y: int
    layer: int = 0

    def __add__(self, other: "Site") -> "Site":
        return Site(self.x + other.x, self.y + other.y, self.layer)


ORIGIN = Site(0, 0, 0)


def _check_site(lattice: LatticeKind, s: Site) -> None:
    if lattice.planar and s.layer != 0:
        raise ValueError(f"site {s} has layer {s.layer} on planar lattice {lattice.value}")
    if s.layer not in (0, 1):
        raise ValueError(f"invalid layer {s.layer}")


def neighbors(lattice: LatticeKind, s: Site) -> list[Site]:
    """Lattice neighbours of ``s`` in the fixed step order of ``lattice``."""
    _check_site(lattice, s)
    out = []
    for dx, dy, vertical in _STEPS[lattice]:
        if vertical:
            out.append(Site(s.x, s.y, 1 - s.layer))
        else:
            out.append(Site(s.x + dx, s.y + dy, s.layer))
    return out


def is_adjacent(lattice: LatticeKind, a: Site, b: Site) -> bool:
    return b in neighbors(lattice, a)


def distance_to_origin(lattice: LatticeKind, x: int, y: int) -> int:
    """Graph distance from planar position (x, y) to the origin."""
    if lattice is LatticeKind.TRIANGULAR:
        return (abs(x) + abs(y) + abs(x + y)) // 2
    return abs(x) + abs(y)


@dataclass(frozen=True)
class Walk:
    """A self-avoiding walk rooted at the origin.

    Construction validates adjacency and self-avoidance, so every ``Walk``
    instance is a valid SAW.
    """

    lattice: LatticeKind
    sites: tuple[Site, ...]

    def __post_init__(self):
        if not self.sites or self.sites[0] != ORIGIN:
            raise ValueError("walk must start at the origin")
        for s in self.sites:
            _check_site(self.lattice, s)
        for a, b in zip(self.sites, self.sites[1:]):
            if not is_adjacent(self.lattice, a, b):
                raise ValueError(f"{a} and {b} are not neighbours")
        if len(set(self.sites)) != len(self.sites):
            raise ValueError("walk is not self-avoiding")

    @classmethod
    def from_steps(cls, lattice: LatticeKind, moves: Iterable[str | int]) -> "Walk":
        """Build a walk from step names (``"E"``, ``"NW"``, ...) or step indices."""
        names = STEP_NAMES[lattice]
        table = _STEPS[lattice]
        cur = ORIGIN
        sites = [cur]
        for m in moves:
            idx = names[m] if isinstance(m, str) else int(m)
            dx, dy, vertical = table[idx]
            if vertical:
                cur = Site(cur.x, cur.y, 1 - cur.layer)
            else:
                cur = Site(cur.x + dx, cur.y + dy, cur.layer)
            sites.append(cur)
        return cls(lattice, tuple(sites))

    @property
    def length(self) -> int:
        return len(self.sites) - 1

    @property
    def end(self) -> Site:
        return self.sites[-1]

    def reversed(self) -> "Walk":
        """The reversed walk, translated so it starts at the origin."""
        last = self.sites[-1]
        shifted = [Site(s.x - last.x, s.y - last.y, s.layer ^ last.layer) for s in reversed(self.sites)]
        return Walk(self.lattice, tuple(shifted))


def _require_planar(w: Walk) -> None:
    if not w.lattice.planar:
        raise ValueError("predicate is defined for planar lattices only")


def is_worm(w: Walk) -> bool:
    """True iff the endpoint has x-coordinate 0 (the origin's)."""
    _require_planar(w)
    if w.length < 1:
        raise ValueError("worms have at least one step")
    return w.end.x == 0


def is_bridge(w: Walk) -> bool:
    """Origin has the unique minimal x, endpoint has a (possibly shared) maximal x."""
    _require_planar(w)
    if w.length < 1:
        raise ValueError("bridges have at least one step")
    xs = [s.x for s in w.sites]
    return all(x > 0 for x in xs[1:]) and xs[-1] == max(xs)


def is_polygon_return(w: Walk) -> bool:
    """True iff the endpoint is adjacent to the origin.

    One-step walks are rejected: closing them would reuse the walk's own edge.
    """
    if w.length < 2:
        raise ValueError("a polygon return needs at least two steps")
    return is_adjacent(w.lattice, w.end, ORIGIN)


def in_class(w: Walk, cls: WalkClass) -> bool:
    if cls is WalkClass.SAW:
        return True
    if cls is WalkClass.WORM:
        return is_worm(w)
    if cls is WalkClass.BRIDGE:
        return is_bridge(w)
    return is_polygon_return(w)


# Point-group elements as integer matrices ((a, b), (c, d)) acting on (x, y).
_SQUARE_D4 = (
    ((1, 0), (0, 1)), ((0, -1), (1, 0)), ((-1, 0), (0, -1)), ((0, 1), (-1, 0)),
    ((1, 0), (0, -1)), ((-1, 0), (0, 1)), ((0, 1), (1, 0)), ((0, -1), (-1, 0)),
)
# Reflections of Z^2 that fix every column x.
_SQUARE_COLUMN = (((1, 0), (0, 1)), ((1, 0), (0, -1)))
# Elements of D4 mapping the line x = 0 onto itself.
_SQUARE_AXIS = (((1, 0), (0, 1)), ((-1, 0), (0, -1)), ((1, 0), (0, -1)), ((-1, 0), (0, 1)))


def _triangular_d6() -> tuple:
    rot = ((0, -1), (1, 1))  # 60 degrees: (1,0) -> (0,1) -> (-1,1) -> ...
    refl = ((-1, 0), (1, 1))  # (x, y) -> (-x, x + y), fixes the line x = 0
    group = [((1, 0), (0, 1))]
    for _ in range(5):
        group.append(_matmul(rot, group[-1]))
    group += [_matmul(g, refl) for g in group[:6]]
    return tuple(group)


def _matmul(a, b):
    return tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(2)) for j in range(2)) for i in range(2)
    )


_TRI_D6 = _triangular_d6()
_TRI_AXIS = tuple(g for g in _TRI_D6 if g[0][1] == 0)  # x' = +-x
_TRI_COLUMN = tuple(g for g in _TRI_D6 if g[0] == (1, 0))  # x' = x


def symmetry_group(lattice: LatticeKind, cls: WalkClass) -> tuple:
    """Origin-fixing lattice symmetries that preserve membership in ``cls``.

    Elements are 2x2 integer matrices acting on planar coordinates; the layer
    coordinate is left untouched.
    """
    if lattice is LatticeKind.TRIANGULAR:
        full, axis, column = _TRI_D6, _TRI_AXIS, _TRI_COLUMN
    else:
        full, axis, column = _SQUARE_D4, _SQUARE_AXIS, _SQUARE_COLUMN
    if cls is WalkClass.WORM:
        return axis
    if cls is WalkClass.BRIDGE:
        return column
    return full


def transform(g, s: Site) -> Site:
    (a, b), (c, d) = g
    return Site(a * s.x + b * s.y, c * s.x + d * s.y, s.layer)


def is_lattice_symmetry(lattice: LatticeKind, g) -> bool:
    """Whether ``g`` permutes the planar step set of ``lattice``."""
    planar = [Site(dx, dy) for dx, dy, v in _STEPS[lattice] if not v]
    return sorted(transform(g, s) for s in planar) == sorted(planar)


def walk_sites_key(sites: Sequence[Site]) -> tuple:
    return tuple((s.x, s.y, s.layer) for s in sites)
