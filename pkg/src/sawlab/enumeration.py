"""Exact backtracking enumeration of walk counts.

A single depth-first traversal tallies every length up to ``n_max``. The
tree is cut at ``prefix_depth``: the top of the tree is walked in Python
(which also produces the short-length tallies), and each depth-``D`` prefix
roots an independent subtree counted by the compiled kernel. With symmetry
reduction enabled, prefixes are grouped into orbits under the origin-fixing
lattice symmetries that preserve the walk class, and only one representative
per orbit is counted, weighted by the orbit size.

All partial sums are exact integers combined by addition, so the result does
not depend on the thread count or on the prefix depth.
"""
from __future__ import annotations

import os
from collections import Counter, deque
from collections.abc import Mapping
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._kernel import count_subtrees
from .lattice import LatticeKind, Site, WalkClass, steps, symmetry_group, transform

INT64_MAX = 2**63 - 1

DEFAULT_PREFIX_DEPTH = {
    LatticeKind.SQUARE: 8,
    LatticeKind.TRIANGULAR: 6,
    LatticeKind.TWO_LAYER: 7,
}


class EnumerationOverflowError(OverflowError):
    """Requested length could exceed the 64-bit tally range of the kernel."""


class InvariantViolation(RuntimeError):
    pass


@dataclass(frozen=True)
class EnumConfig:
    n_max: int
    prefix_depth: int | None = None
    symmetry_reduction: bool = True
    thread_hint: int | None = None

    def __post_init__(self):
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")
        if self.prefix_depth is not None and not 1 <= self.prefix_depth <= self.n_max:
            raise ValueError("prefix_depth must satisfy 1 <= prefix_depth <= n_max")
        if self.thread_hint is not None and self.thread_hint < 1:
            raise ValueError("thread_hint must be >= 1")

    def depth_for(self, lattice: LatticeKind) -> int:
        if self.prefix_depth is not None:
            return self.prefix_depth
        return min(self.n_max, DEFAULT_PREFIX_DEPTH[lattice])

    @property
    def threads(self) -> int:
        return self.thread_hint or os.cpu_count() or 1


@dataclass(frozen=True)
class CountSeries(Mapping):
    """Exact counts indexed by walk length, contiguous from ``start``."""

    lattice: LatticeKind | None
    walk_class: WalkClass | None
    values: tuple[int, ...]
    provenance: str = "enumerated"
    start: int = 1

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))

    def __getitem__(self, n: int) -> int:
        i = n - self.start
        if not 0 <= i < len(self.values):
            raise KeyError(n)
        return self.values[i]

    def __iter__(self):
        return iter(range(self.start, self.start + len(self.values)))

    def __len__(self) -> int:
        return len(self.values)

    @property
    def n_max(self) -> int:
        return self.start + len(self.values) - 1

    def truncate(self, n_max: int) -> "CountSeries":
        return CountSeries(self.lattice, self.walk_class,
                           self.values[: n_max - self.start + 1], self.provenance, self.start)

    __hash__ = object.__hash__


@dataclass(frozen=True)
class BivariateCounts:
    """Two-layer counts ``c[n, k]`` by length n and number of vertical steps k."""

    rows: tuple[tuple[int, ...], ...]  # rows[n-1][k], k = 0..n
    provenance: str = "enumerated"

    def __getitem__(self, nk: tuple[int, int]) -> int:
        n, k = nk
        if not 1 <= n <= self.n_max:
            raise KeyError(nk)
        return self.rows[n - 1][k] if 0 <= k <= n else 0

    @property
    def n_max(self) -> int:
        return len(self.rows)

    def row(self, n: int) -> tuple[int, ...]:
        return self.rows[n - 1]

    def totals(self) -> CountSeries:
        return CountSeries(LatticeKind.TWO_LAYER, WalkClass.SAW,
                           tuple(sum(r) for r in self.rows), self.provenance)

    def planar(self) -> CountSeries:
        return CountSeries(LatticeKind.SQUARE, WalkClass.SAW,
                           tuple(r[0] for r in self.rows), self.provenance)


@dataclass
class _Geometry:
    lattice: LatticeKind
    cls: WalkClass
    n_max: int
    width: int
    offset: int
    offs: np.ndarray
    vert: np.ndarray
    xcoord: np.ndarray
    target: np.ndarray
    reach: np.ndarray
    layers: int = field(default=1)

    @property
    def plane(self) -> int:
        return self.width * self.width

    def cell(self, x: int, y: int, layer: int = 0) -> int:
        return layer * self.plane + (y + self.offset) * self.width + (x + self.offset)

    def site(self, c: int) -> Site:
        layer, r = divmod(c, self.plane)
        y, x = divmod(r, self.width)
        return Site(x - self.offset, y - self.offset, layer)


def _geometry(lattice: LatticeKind, cls: WalkClass, n_max: int) -> _Geometry:
    off = n_max + 1
    width = 2 * off + 1
    layers = 1 if lattice.planar else 2
    plane = width * width
    table = steps(lattice)
    offs = np.zeros((layers, len(table)), np.int64)
    vert = np.zeros(len(table), np.int64)
    for s, (dx, dy, v) in enumerate(table):
        for layer in range(layers):
            offs[layer, s] = (1 - 2 * layer) * plane if v else dx + dy * width
        vert[s] = int(v)
    ncell = layers * plane
    idx = np.arange(ncell)
    xs = idx % plane % width - off
    ys = idx % plane // width - off
    ls = idx // plane
    if cls is WalkClass.WORM:
        target = (xs == 0)
    elif cls is WalkClass.POLYGON:
        target = np.zeros(ncell, bool)
        for dx, dy, v in table:
            target[(ls == int(v)) & (xs == (0 if v else dx)) & (ys == (0 if v else dy))] = True
    else:
        target = np.ones(ncell, bool)
    geom = _Geometry(lattice, cls, n_max, width, off, offs, vert, xs.astype(np.int64),
                     target.astype(np.int64), np.zeros(ncell, np.int64), layers)
    if cls in (WalkClass.WORM, WalkClass.POLYGON):
        geom.reach = _distance_to_targets(geom, target, xs, ys, ls)
    return geom


def _distance_to_targets(geom, target, xs, ys, ls) -> np.ndarray:
    """Graph distance of every grid cell to the nearest target cell (BFS)."""
    big = 10 * geom.n_max + 10
    dist = np.full(target.shape[0], big, np.int64)
    queue = deque(int(c) for c in np.flatnonzero(target))
    dist[target] = 0
    lim = geom.offset
    table = steps(geom.lattice)
    while queue:
        c = queue.popleft()
        for s, (dx, dy, v) in enumerate(table):
            if not v and (abs(xs[c] + dx) > lim or abs(ys[c] + dy) > lim):
                continue
            q = c + geom.offs[ls[c], s]
            if dist[q] > dist[c] + 1:
                dist[q] = dist[c] + 1
                queue.append(q)
    return dist


def _check_capacity(lattice: LatticeKind, n_max: int) -> None:
    z = lattice.coordination
    if z * (z - 1) ** (n_max - 1) > INT64_MAX:
        raise EnumerationOverflowError(
            f"n_max={n_max} on {lattice.value} may exceed the 64-bit tally range; refusing to run"
        )


def _prefixes(geom: _Geometry, depth: int, kdim: int):
    """Walk the tree to ``depth`` in Python.

    Returns (short tallies for lengths <= depth, list of depth-``depth``
    prefixes as cell tuples whose subtrees may still contribute).
    """
    short = np.zeros((geom.n_max + 1, kdim), dtype=object)
    short[:] = 0
    out = []
    n_max = geom.n_max
    bridge = geom.cls is WalkClass.BRIDGE
    origin = geom.cell(0, 0, 0)
    path = [origin]
    occupied = {origin}

    def rec(cur: int, k: int, maxx: int):
        d = len(path) - 1
        if d == depth:
            out.append(tuple(path))
            return
        for s in range(geom.offs.shape[1]):
            q = cur + int(geom.offs[cur // geom.plane, s])
            if q in occupied:
                continue
            nd = d + 1
            k2 = k + int(geom.vert[s])
            m2 = maxx
            if bridge:
                xq = int(geom.xcoord[q])
                if xq <= 0:
                    continue
                if xq >= m2:
                    m2 = xq
                    short[nd, 0] += 1
            elif geom.target[q]:
                short[nd, k2 if kdim > 1 else 0] += 1
            if nd < n_max and geom.reach[q] <= n_max - nd:
                occupied.add(q)
                path.append(q)
                rec(q, k2, m2)
                path.pop()
                occupied.discard(q)

    rec(origin, 0, 0)
    return short, out


def _orbits(geom: _Geometry, prefixes, reduce: bool):
    if not reduce:
        return prefixes, [1] * len(prefixes)
    group = symmetry_group(geom.lattice, geom.cls)
    weights: Counter = Counter()
    for p in prefixes:
        sites = [geom.site(c) for c in p]
        images = (tuple(geom.cell(*_xyl(transform(g, s))) for s in sites) for g in group)
        weights[min(images)] += 1
    canon = sorted(weights)
    return canon, [weights[c] for c in canon]


def _xyl(s: Site):
    return s.x, s.y, s.layer


def _count(lattice: LatticeKind, cls: WalkClass, cfg: EnumConfig, resolve_k: bool) -> np.ndarray:
    """Exact tallies as an object array ``[n_max+1, K]`` of Python ints."""
    _check_capacity(lattice, cfg.n_max)
    n_max = cfg.n_max
    kdim = n_max + 1 if resolve_k else 1
    geom = _geometry(lattice, cls, n_max)
    depth = cfg.depth_for(lattice)
    tallies, prefixes = _prefixes(geom, depth, kdim)
    if depth == n_max or not prefixes:
        return tallies
    canon, weights = _orbits(geom, prefixes, cfg.symmetry_reduction)
    pref = np.asarray(canon, dtype=np.int64)
    w = np.asarray(weights, dtype=np.int64)
    threads = cfg.threads
    nchunks = min(len(pref), 16 * threads)
    chunks = [np.arange(j, len(pref), nchunks) for j in range(nchunks)]
    bridge = cls is WalkClass.BRIDGE
    kscale = 1 if resolve_k else 0

    def work(idx):
        out = np.zeros((len(idx), n_max + 1, kdim), np.int64)
        count_subtrees(pref[idx], n_max, geom.offs, geom.vert, geom.xcoord,
                       geom.target, geom.reach, bridge, kscale, out)
        return np.tensordot(w[idx], out, axes=1)

    if threads == 1:
        parts = [work(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, chunks))
    for part in parts:
        tallies = tallies + part.astype(object)
    return tallies


def enumerate_series(lattice: LatticeKind, walk_class: WalkClass, cfg: EnumConfig) -> CountSeries:
    """Counts of origin-rooted n-step walks of ``walk_class``, 1 <= n <= n_max."""
    if walk_class is WalkClass.WORM:
        return enumerate_worms(lattice, cfg)
    tallies = _count(lattice, walk_class, cfg, resolve_k=False)
    values = [int(tallies[n, 0]) for n in range(1, cfg.n_max + 1)]
    if walk_class is WalkClass.POLYGON:
        values[0] = 0  # a one-step walk cannot be closed into a polygon
    return CountSeries(lattice, walk_class, tuple(values))


def raw_worm_counts(lattice: LatticeKind, cfg: EnumConfig) -> list[int]:
    """Origin-rooted SAWs ending on the origin's column, by length."""
    if not lattice.planar:
        raise ValueError("worms are defined on planar lattices only")
    tallies = _count(lattice, WalkClass.WORM, cfg, resolve_k=False)
    return [int(tallies[n, 0]) for n in range(1, cfg.n_max + 1)]


def enumerate_worms(lattice: LatticeKind, cfg: EnumConfig) -> CountSeries:
    """Worm counts w_n: the raw column-return count, halved.

    Path reversal pairs up raw walks without fixed points, so the raw count
    must be even; an odd value means the traversal is broken.
    """
    raw = raw_worm_counts(lattice, cfg)
    for n, r in enumerate(raw, start=1):
        if r % 2:
            raise InvariantViolation(f"odd raw worm count {r} at n={n}")
    return CountSeries(lattice, WalkClass.WORM, tuple(r // 2 for r in raw))


def enumerate_two_layer(cfg: EnumConfig) -> BivariateCounts:
    """Two-layer SAW counts resolved by number of vertical steps."""
    tallies = _count(LatticeKind.TWO_LAYER, WalkClass.SAW, cfg, resolve_k=True)
    rows = tuple(tuple(int(tallies[n, k]) for k in range(n + 1)) for n in range(1, cfg.n_max + 1))
    for n in range(1, cfg.n_max + 1):
        if any(tallies[n, k] for k in range(n + 1, cfg.n_max + 1)):
            raise InvariantViolation(f"more vertical steps than steps at n={n}")
    return BivariateCounts(rows)
