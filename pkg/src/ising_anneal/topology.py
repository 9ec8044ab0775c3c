"""Domain-wall loops and winding numbers on periodic lattices.

Walls are traced on the dual lattice: every unsatisfied bond carries one
directed dual edge, oriented with the +1 spin on its left.  Where four
wall edges meet (a checkerboard corner) the walk turns left; applied
everywhere, this resolves each crossing identically (the -1 domains stay
corner-connected) and every wall decomposes into closed loops whose net
displacement is a multiple of L along each axis.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .lattice import Boundary, SpinLattice


@dataclass(frozen=True)
class WindingNumber:
    """Nonnegative winding pair (wx, wy) of a configuration."""

    wx: int
    wy: int

    def __iter__(self):
        return iter((self.wx, self.wy))

    @property
    def wound(self) -> bool:
        return self.wx > 0 or self.wy > 0

    def norm2(self) -> int:
        return self.wx * self.wx + self.wy * self.wy


@dataclass
class WallLoop:
    """One closed domain-wall loop.

    edges holds (bond_id, direction) steps; directions are 0:+x 1:+y
    2:-x 3:-y.  displacement is the signed net (dx, dy) in lattice units.
    """

    edges: list[tuple[int, int]]
    displacement: tuple[int, int]

    def __len__(self) -> int:
        return len(self.edges)

    def winding(self) -> tuple[int, int]:
        dx, dy = self.displacement
        return (abs(dx), abs(dy))


_STEP = {0: (1, 0), 1: (0, 1), 2: (-1, 0), 3: (0, -1)}


def _require_periodic(lat: SpinLattice) -> None:
    if lat.boundary is not Boundary.PERIODIC:
        raise ValueError(
            "winding is defined on periodic lattices only; "
            "use md2 / straight-wall classifiers for open boundaries"
        )


def trace_walls(lat: SpinLattice) -> list[WallLoop]:
    """All domain-wall loops, each with its full edge sequence."""
    _require_periodic(lat)
    L = lat.L
    n = L * L
    spins = lat.spins

    def edge_dir(bond: int) -> int:
        if bond < n:
            x, y = bond % L, bond // L
            if spins[bond] == spins[y * L + (x + 1) % L]:
                return -1
            return 1 if spins[bond] > 0 else 3
        b = bond - n
        x, y = b % L, b // L
        north = spins[((y + 1) % L) * L + x]
        if spins[b] == north:
            return -1
        return 0 if north > 0 else 2

    def head_vertex(bond: int, d: int) -> tuple[int, int]:
        if bond < n:
            x, y = bond % L, bond // L
            return ((x + 1) % L, (y + 1) % L if d == 1 else y)
        b = bond - n
        x, y = b % L, b // L
        return ((x + 1) % L if d == 0 else x, (y + 1) % L)

    def vertex_edges(vx: int, vy: int) -> list[tuple[int, int]]:
        """(bond, leaving_direction) for edges directed away from (vx, vy)."""
        xm, ym = (vx - 1) % L, (vy - 1) % L
        incident = (
            (vy * L + xm, 1),       # above: leaves heading +y
            (ym * L + xm, 3),       # below: leaves heading -y
            (n + ym * L + vx, 0),   # east: +x
            (n + ym * L + xm, 2),   # west: -x
        )
        return [(e, leave) for e, leave in incident if edge_dir(e) == leave]

    visited = np.zeros(2 * n, dtype=bool)
    loops: list[WallLoop] = []
    for start in range(2 * n):
        if visited[start]:
            continue
        d = edge_dir(start)
        if d < 0:
            visited[start] = True
            continue
        edges: list[tuple[int, int]] = []
        dx = dy = 0
        bond = start
        while True:
            visited[bond] = True
            edges.append((bond, d))
            sx, sy = _STEP[d]
            dx += sx
            dy += sy
            out = vertex_edges(*head_vertex(bond, d))
            if len(out) == 1:
                bond, d = out[0]
            else:
                left = (d + 1) % 4
                bond, d = next((e, dd) for e, dd in out if dd == left)
            if bond == start:
                break
        loops.append(WallLoop(edges, (dx, dy)))
    return loops


def winding_number(lat: SpinLattice) -> WindingNumber:
    """Winding of the wall loop maximizing wx^2 + wy^2; (0,0) if none winds."""
    _require_periodic(lat)
    wx, wy, _, _, _ = _kernels.winding_summary(lat.spins, lat.L)
    return WindingNumber(int(wx), int(wy))


def winding_summary(lat: SpinLattice) -> dict:
    """Winding plus loop statistics: {wx, wy, w2, loops, wall_edges}."""
    _require_periodic(lat)
    wx, wy, w2, nloops, nedges = _kernels.winding_summary(lat.spins, lat.L)
    return {
        "wx": int(wx),
        "wy": int(wy),
        "w2": int(w2),
        "loops": int(nloops),
        "wall_edges": int(nedges),
    }


# Sector keys used in reports: equivalent (a,b)/(b,a) pairs are summed.
DOMINANT_SECTORS = ("0,0", "1,0", "1,1", "2,1")


def sector_key(wx: int, wy: int) -> str:
    a, b = max(wx, wy), min(wx, wy)
    key = f"{a},{b}"
    return key if key in DOMINANT_SECTORS else "other"


def winding_histogram(samples) -> dict:
    """Empirical winding-sector probabilities over largest-winding walls.

    samples: iterable of WindingNumber, (wx, wy) pairs, or SpinLattice.
    Mirror sectors (a,b)/(b,a) are summed; higher sectors are binned as
    "other".  Also returns the mean squared winding <wx^2 + wy^2> of the
    reported (largest) wall.
    """
    counts: Counter[str] = Counter()
    w2_total = 0.0
    n = 0
    for s in samples:
        if isinstance(s, SpinLattice):
            s = winding_number(s)
        wx, wy = (int(v) for v in s)
        counts[sector_key(wx, wy)] += 1
        w2_total += wx * wx + wy * wy
        n += 1
    if n == 0:
        raise ValueError("winding_histogram needs at least one sample")
    probs = {k: counts.get(k, 0) / n for k in DOMINANT_SECTORS}
    probs["other"] = counts.get("other", 0) / n
    probs["w2_mean"] = w2_total / n
    probs["n"] = n
    return probs
