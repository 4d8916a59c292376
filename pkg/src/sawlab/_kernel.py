"""Compiled depth-first counting kernel.

The lattice is flattened into a padded occupancy grid so that every step is
a constant offset (one offset row per layer). All per-cell properties the
walk classes need are precomputed into flat arrays, which keeps the inner
loop free of lattice-specific branches.
"""
import numpy as np
from numba import njit


@njit(nogil=True, cache=True)
def count_subtrees(prefixes, n_max, offs, vert, xcoord, target, reach, bridge, kscale, out):
    """Tally all extensions of each prefix, by length, into ``out``.

    prefixes : int64[P, D+1]   flat cells of each depth-D prefix (origin first)
    offs     : int64[L, S]     flat offset of step s from a cell in layer l
    vert     : int64[S]        1 for vertical (layer-changing) steps
    xcoord   : int64[C]        x-coordinate of every cell
    target   : int64[C]        1 where a walk ending in the cell is tallied
    reach    : int64[C]        lower bound on steps needed to reach a target
    bridge   : bool            apply the bridge rules instead of ``target``
    kscale   : int             1 to resolve tallies by vertical-step count, else 0
    out      : int64[P, n_max+1, K]   accumulated tallies (lengths > D only)
    """
    n_pref, plen1 = prefixes.shape
    plen = plen1 - 1
    nsteps = offs.shape[1]
    plane = xcoord.shape[0] // offs.shape[0]
    grid = np.zeros(xcoord.shape[0], np.uint8)
    pos = np.zeros(n_max + 1, np.int64)
    nxt = np.zeros(n_max + 1, np.int64)
    kk = np.zeros(n_max + 1, np.int64)
    mx = np.zeros(n_max + 1, np.int64)
    lay = np.zeros(n_max + 1, np.int64)
    for i in range(n_pref):
        k = 0
        m = 0
        for d in range(plen1):
            c = prefixes[i, d]
            grid[c] = 1
            if d > 0:
                if c // plane != prefixes[i, d - 1] // plane:
                    k += 1
                if xcoord[c] > m:
                    m = xcoord[c]
        depth = plen
        pos[depth] = prefixes[i, plen]
        kk[depth] = k
        mx[depth] = m
        nxt[depth] = 0
        lay[depth] = prefixes[i, plen] // plane
        while True:
            s = nxt[depth]
            if s == nsteps:
                if depth == plen:
                    break
                grid[pos[depth]] = 0
                depth -= 1
                continue
            nxt[depth] = s + 1
            cur = pos[depth]
            q = cur + offs[lay[depth], s]
            if grid[q]:
                continue
            nd = depth + 1
            k2 = kk[depth] + vert[s]
            m2 = mx[depth]
            if bridge:
                xq = xcoord[q]
                if xq <= 0:
                    continue
                if xq >= m2:
                    m2 = xq
                    out[i, nd, 0] += 1
            elif target[q]:
                out[i, nd, k2 * kscale] += 1
            if nd >= n_max or reach[q] > n_max - nd:
                continue
            if nd == n_max - 1:
                # children of q are leaves: count them without descending
                lq = lay[depth] ^ vert[s]
                for s2 in range(nsteps):
                    r = q + offs[lq, s2]
                    if grid[r]:
                        continue
                    if bridge:
                        xr = xcoord[r]
                        if xr > 0 and xr >= m2:
                            out[i, n_max, 0] += 1
                    elif target[r]:
                        out[i, n_max, (k2 + vert[s2]) * kscale] += 1
            else:
                grid[q] = 1
                pos[nd] = q
                kk[nd] = k2
                mx[nd] = m2
                lay[nd] = lay[depth] ^ vert[s]
                nxt[nd] = 0
                depth = nd
        for d in range(plen1):
            grid[prefixes[i, d]] = 0
    return out
