"""Hot loops, compiled with numba.

Conventions shared by every kernel here:

* sites are row-major, ``i = y*L + x``;
* replica words hold replica ``b`` of site ``i`` in bit ``b`` of
  ``words[i]`` with bit 1 meaning spin +1;
* every flip attempt consumes exactly two RNG draws (site, uniform),
  in that order, so the bit-parallel and scalar kernels walk the same
  stream and produce bit-identical trajectories;
* temperatures are in units of J.

The RNG is xoshiro256** seeded via splitmix64 (see rng.py); states are
4-element uint64 arrays mutated in place.
"""

from __future__ import annotations

import numpy as np
from numba import njit

U0 = np.uint64(0)
U1 = np.uint64(1)
UFULL = np.uint64(0xFFFFFFFFFFFFFFFF)
_R11 = np.uint64(11)
_R32 = np.uint64(32)
_INV53 = 1.0 / 9007199254740992.0  # 2**-53


# ---------------------------------------------------------------------------
# RNG
# ---------------------------------------------------------------------------

@njit(inline="always", cache=True)
def _rotl(x, k):
    return np.uint64((x << np.uint64(k)) | (x >> np.uint64(64 - k)))


@njit(inline="always", cache=True)
def rng_next(state):
    """One xoshiro256** step; mutates state, returns a uint64."""
    result = np.uint64(_rotl(np.uint64(state[1] * np.uint64(5)), 7) * np.uint64(9))
    t = np.uint64(state[1] << np.uint64(17))
    state[2] ^= state[0]
    state[3] ^= state[1]
    state[1] ^= state[2]
    state[0] ^= state[3]
    state[2] ^= t
    state[3] = _rotl(state[3], 45)
    return result


@njit(inline="always", cache=True)
def rng_uniform(state):
    """Uniform double in [0, 1) from the top 53 bits."""
    return float(rng_next(state) >> _R11) * _INV53


@njit(inline="always", cache=True)
def rng_site(state, n):
    """Uniform site index in [0, n) by 32-bit range scaling."""
    r = rng_next(state) >> _R32
    return int((r * np.uint64(n)) >> _R32)


# ---------------------------------------------------------------------------
# Metropolis sweeps, bit-parallel over 64 replicas
# ---------------------------------------------------------------------------

@njit(cache=True)
def metropolis_sweeps_words(words, nbrs, nnbr, temps, state):
    """Run len(temps) sweeps on a 64-replica word array.

    One sweep is N random-site attempts; all replicas share the same
    (site, uniform) pair per attempt, and the acceptance is evaluated
    bitwise by comparing the uniform against exp(-dE/T) for the positive
    flip costs (dE in {4,8} in the bulk, {2,6} on edges, {4} on corners).
    """
    n = words.shape[0]
    for t in range(temps.shape[0]):
        temp = temps[t]
        if temp > 0.0:
            p2 = np.exp(-2.0 / temp)
            p4 = np.exp(-4.0 / temp)
            p6 = np.exp(-6.0 / temp)
            p8 = np.exp(-8.0 / temp)
        else:
            p2 = 0.0
            p4 = 0.0
            p6 = 0.0
            p8 = 0.0
        for _ in range(n):
            site = rng_site(state, n)
            u = rng_uniform(state)
            s = words[site]
            nn = nnbr[site]
            if nn == 4:
                a0 = ~(s ^ words[nbrs[site, 0]])
                a1 = ~(s ^ words[nbrs[site, 1]])
                a2 = ~(s ^ words[nbrs[site, 2]])
                a3 = ~(s ^ words[nbrs[site, 3]])
                t1 = a0 ^ a1
                c1 = a0 & a1
                t2 = a2 ^ a3
                c2 = a2 & a3
                ones = t1 ^ t2
                c3 = t1 & t2
                twos = c1 ^ c2 ^ c3
                fours = (c1 & c2) | (c1 & c3) | (c2 & c3)
                k3 = ones & twos  # exactly 3 agreeing neighbors: dE = +4
                k4 = fours        # all 4 agree: dE = +8
                m4 = UFULL if u < p4 else U0
                m8 = UFULL if u < p8 else U0
                accept = (~(k3 | k4)) | (k3 & m4) | (k4 & m8)
            elif nn == 3:
                a0 = ~(s ^ words[nbrs[site, 0]])
                a1 = ~(s ^ words[nbrs[site, 1]])
                a2 = ~(s ^ words[nbrs[site, 2]])
                all3 = a0 & a1 & a2               # dE = +6
                maj = (a0 & a1) | (a0 & a2) | (a1 & a2)
                k2 = maj & ~all3                  # dE = +2
                m2 = UFULL if u < p2 else U0
                m6 = UFULL if u < p6 else U0
                accept = (~maj) | (k2 & m2) | (all3 & m6)
            else:  # corner, nn == 2
                a0 = ~(s ^ words[nbrs[site, 0]])
                a1 = ~(s ^ words[nbrs[site, 1]])
                both = a0 & a1                    # dE = +4
                m4 = UFULL if u < p4 else U0
                accept = (~both) | (both & m4)
            words[site] = s ^ accept


@njit(cache=True)
def metropolis_sweeps_scalar(spins, nbrs, nnbr, temps, state):
    """Scalar reference dynamics consuming the same RNG stream.

    spins is int8 +-1; with identical (seed, stream) and initial state,
    replica b of the word kernel follows exactly this trajectory.
    """
    n = spins.shape[0]
    for t in range(temps.shape[0]):
        temp = temps[t]
        p = np.zeros(5)
        if temp > 0.0:
            p[1] = np.exp(-2.0 / temp)
            p[2] = np.exp(-4.0 / temp)
            p[3] = np.exp(-6.0 / temp)
            p[4] = np.exp(-8.0 / temp)
        for _ in range(n):
            site = rng_site(state, n)
            u = rng_uniform(state)
            h = 0
            for j in range(nnbr[site]):
                h += spins[nbrs[site, j]]
            de = 2 * spins[site] * h
            if de <= 0 or u < p[de >> 1]:
                spins[site] = -spins[site]


# ---------------------------------------------------------------------------
# Swendsen-Wang
# ---------------------------------------------------------------------------

@njit(inline="always", cache=True)
def _find(parent, i):
    root = i
    while parent[root] != root:
        root = parent[root]
    while parent[i] != root:  # path compression
        nxt = parent[i]
        parent[i] = root
        i = nxt
    return root


@njit(cache=True)
def sw_sweep_kernel(spins, L, p_bond, periodic, state):
    """One Swendsen-Wang update: bond percolation on aligned pairs,
    then each cluster flipped with probability 1/2.

    Bond coins are drawn site-by-site (right bond then down bond) and
    cluster coins in root-index order, so the update is reproducible.
    """
    n = L * L
    parent = np.arange(n, dtype=np.int64)
    for y in range(L):
        for x in range(L):
            i = y * L + x
            if x + 1 < L or periodic:
                jr = y * L + (x + 1) % L
                if spins[i] == spins[jr] and rng_uniform(state) < p_bond:
                    ri = _find(parent, i)
                    rj = _find(parent, jr)
                    if ri != rj:
                        parent[rj] = ri
            if y + 1 < L or periodic:
                jd = ((y + 1) % L) * L + x
                if spins[i] == spins[jd] and rng_uniform(state) < p_bond:
                    ri = _find(parent, i)
                    rj = _find(parent, jd)
                    if ri != rj:
                        parent[rj] = ri
    flip = np.zeros(n, dtype=np.int8)
    seen = np.zeros(n, dtype=np.int8)
    for i in range(n):
        r = _find(parent, i)
        if not seen[r]:
            seen[r] = 1
            flip[r] = 1 if rng_uniform(state) < 0.5 else 0
        if flip[r]:
            spins[i] = -spins[i]


# ---------------------------------------------------------------------------
# Domain-wall tracing and winding numbers (periodic lattices)
# ---------------------------------------------------------------------------
#
# Wall edges live on the dual lattice; each unsatisfied bond carries one
# directed dual edge oriented so the +1 spin sits on its left.  At dual
# vertices where four wall edges meet (checkerboard corners) the walk
# turns left, which resolves every crossing the same way (equivalently:
# -1 domains stay corner-connected).  Directions: 0:+x 1:+y 2:-x 3:-y.
# Bonds 0..N-1 are horizontal (site i to +x, dual edge vertical), bonds
# N..2N-1 vertical (site i to +y, dual edge horizontal).

@njit(cache=True)
def trace_winding(spins, L, loops_out, visited):
    """Trace every domain-wall loop; fill loops_out with (dx, dy, length).

    Returns the number of loops.  loops_out needs room for N/2 rows (the
    shortest loop has 4 edges); visited is a reusable 2N int8 scratch.

    The walk carries the head dual vertex (vx, vy): the lattice corner
    shared by sites A=(vx-1,vy-1), B=(vx,vy-1), C=(vx-1,vy), D=(vx,vy).
    Incident wall edges and their leaving directions follow from the four
    surrounding spins alone: N edge leaves +y iff C is up, S leaves -y
    iff A is down, E leaves +x iff D is up, W leaves -x iff C is down.
    """
    n = L * L
    for i in range(2 * n):
        visited[i] = 0
    nloops = 0
    for y in range(L):
        yp = y + 1 if y + 1 < L else 0
        for x in range(L):
            xp = x + 1 if x + 1 < L else 0
            i = y * L + x
            for vert in range(2):
                if vert == 0:
                    start = i
                    if visited[start] or spins[i] == spins[y * L + xp]:
                        continue
                    d = 1 if spins[i] > 0 else 3
                    vx = xp
                    vy = yp if d == 1 else y
                else:
                    start = n + i
                    north = spins[yp * L + x]
                    if visited[start] or spins[i] == north:
                        continue
                    d = 0 if north > 0 else 2
                    vx = xp if d == 0 else x
                    vy = yp
                bond = start
                dx = 0
                dy = 0
                length = 0
                while True:
                    visited[bond] = 1
                    length += 1
                    if d == 0:
                        dx += 1
                    elif d == 1:
                        dy += 1
                    elif d == 2:
                        dx -= 1
                    else:
                        dy -= 1
                    xm = vx - 1 if vx > 0 else L - 1
                    ym = vy - 1 if vy > 0 else L - 1
                    sa = spins[ym * L + xm]
                    sb = spins[ym * L + vx]
                    sc = spins[vy * L + xm]
                    sd = spins[vy * L + vx]
                    # out-edges at the vertex (at most two; left turn wins)
                    left = (d + 1) & 3
                    nd = -1
                    if sc != sd and sc > 0:  # N, leaves +y
                        nd = 1
                        nbond = vy * L + xm
                    if (nd < 0 or left == 3) and sa != sb and sa < 0:  # S, -y
                        nd = 3
                        nbond = ym * L + xm
                    if (nd < 0 or left == 0) and sb != sd and sd > 0:  # E, +x
                        nd = 0
                        nbond = n + ym * L + vx
                    if (nd < 0 or left == 2) and sa != sc and sc < 0:  # W, -x
                        nd = 2
                        nbond = n + ym * L + xm
                    d = nd
                    bond = nbond
                    if d == 0:
                        vx = vx + 1 if vx + 1 < L else 0
                    elif d == 1:
                        vy = vy + 1 if vy + 1 < L else 0
                    elif d == 2:
                        vx = xm
                    else:
                        vy = ym
                    if bond == start:
                        break
                loops_out[nloops, 0] = dx
                loops_out[nloops, 1] = dy
                loops_out[nloops, 2] = length
                nloops += 1
    return nloops


@njit(cache=True)
def winding_summary(spins, L):
    """(wx, wy, w2_sum, n_loops, n_wall_edges) of a periodic configuration.

    (wx, wy) belongs to the loop maximizing wx^2 + wy^2, components
    normalized nonnegative; w2_sum accumulates wx^2 + wy^2 over all loops.
    """
    n = L * L
    loops = np.empty((n // 2 + 1, 3), dtype=np.int64)
    visited = np.empty(2 * n, dtype=np.int8)
    nloops = trace_winding(spins, L, loops, visited)
    wx = 0
    wy = 0
    best = -1
    w2 = 0
    nedges = 0
    for i in range(nloops):
        lx = abs(loops[i, 0]) // L
        ly = abs(loops[i, 1]) // L
        w2 += lx * lx + ly * ly
        nedges += loops[i, 2]
        norm = lx * lx + ly * ly
        if norm > best:
            best = norm
            wx = lx
            wy = ly
    return wx, wy, w2, nloops, nedges


@njit(cache=True)
def has_winding(spins, L, loops, visited):
    """True if any wall loop winds (scratch buffers supplied by caller)."""
    nloops = trace_winding(spins, L, loops, visited)
    for i in range(nloops):
        if loops[i, 0] != 0 or loops[i, 1] != 0:
            return True
    return False


# ---------------------------------------------------------------------------
# Open-boundary terminal-state classifiers
# ---------------------------------------------------------------------------

@njit(cache=True)
def is_ferro(spins):
    first = spins[0]
    for i in range(1, spins.shape[0]):
        if spins[i] != first:
            return False
    return True


@njit(cache=True)
def is_straight_wall(spins, L):
    """Exactly one straight horizontal or vertical wall (open boundaries):
    every row (or column) uniform with a single sign change across them."""
    # rows uniform?
    rows_ok = True
    changes = 0
    prev = np.int8(0)
    for y in range(L):
        v = spins[y * L]
        for x in range(1, L):
            if spins[y * L + x] != v:
                rows_ok = False
                break
        if not rows_ok:
            break
        if y > 0 and v != prev:
            changes += 1
        prev = v
    if rows_ok and changes == 1:
        return True
    cols_ok = True
    changes = 0
    for x in range(L):
        v = spins[x]
        for y in range(1, L):
            if spins[y * L + x] != v:
                cols_ok = False
                break
        if not cols_ok:
            break
        if x > 0 and v != prev:
            changes += 1
        prev = v
    return cols_ok and changes == 1


# ---------------------------------------------------------------------------
# Decay harnesses (fixed temperature, winding / terminal-state watched)
# ---------------------------------------------------------------------------

@njit(cache=True)
def fixed_t_decay_kernel(spins, nbrs, nnbr, L, temp, cap, state):
    """Sweeps at fixed T until the winding number reaches (0,0).

    Returns (tau, 0) on decay after tau sweeps, (cap, 1) on timeout.
    The winding is checked after every full sweep, matching the
    measurement cadence of the sweep-resolved observables.
    """
    n = L * L
    p = np.zeros(5)
    if temp > 0.0:
        p[1] = np.exp(-2.0 / temp)
        p[2] = np.exp(-4.0 / temp)
        p[3] = np.exp(-6.0 / temp)
        p[4] = np.exp(-8.0 / temp)
    loops = np.empty((n // 2 + 1, 3), dtype=np.int64)
    visited = np.empty(2 * n, dtype=np.int8)
    for sweep in range(1, cap + 1):
        for _ in range(n):
            site = rng_site(state, n)
            u = rng_uniform(state)
            h = 0
            for j in range(nnbr[site]):
                h += spins[nbrs[site, j]]
            de = 2 * spins[site] * h
            if de <= 0 or u < p[de >> 1]:
                spins[site] = -spins[site]
        if not has_winding(spins, L, loops, visited):
            return sweep, 0
    return cap, 1


@njit(cache=True)
def open_diag_decay_kernel(spins, nbrs, nnbr, L, cap, state):
    """Zero-T sweeps on an open lattice until the state is fully
    ferromagnetic (outcome 0) or a single straight wall (outcome 1).

    Returns (tau, outcome); (cap, 2) on timeout.
    """
    n = L * L
    for sweep in range(1, cap + 1):
        for _ in range(n):
            site = rng_site(state, n)
            rng_uniform(state)  # keep the two-draw attempt format
            h = 0
            for j in range(nnbr[site]):
                h += spins[nbrs[site, j]]
            if spins[site] * h <= 0:
                spins[site] = -spins[site]
        if is_ferro(spins):
            return sweep, 0
        if is_straight_wall(spins, L):
            return sweep, 1
    return cap, 2


# ---------------------------------------------------------------------------
# Replica extraction
# ---------------------------------------------------------------------------

@njit(cache=True)
def extract_replica(words, b):
    """Replica b of a word array as an int8 +-1 spin array."""
    n = words.shape[0]
    out = np.empty(n, dtype=np.int8)
    shift = np.uint64(b)
    for i in range(n):
        out[i] = np.int8(2 * np.int64((words[i] >> shift) & U1) - 1)
    return out


@njit(cache=True)
def replica_windings(words, L):
    """Winding (wx, wy, w2_sum) of each of the 64 replicas."""
    out = np.empty((64, 3), dtype=np.int64)
    for b in range(64):
        spins = extract_replica(words, b)
        wx, wy, w2, _, _ = winding_summary(spins, L)
        out[b, 0] = wx
        out[b, 1] = wy
        out[b, 2] = w2
    return out
