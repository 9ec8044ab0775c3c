"""Independent reference implementations used only by the tests.

Everything here is deliberately written from scratch against the
definitions (flood fill, exhaustive enumeration, dense linear algebra,
the exact finite-torus partition function) and never calls back into
the package's production code paths it is checking.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


# ---------------------------------------------------------------------------
# Percolation / wrap oracle for winding detection
# ---------------------------------------------------------------------------

def wrap_directions(grid: np.ndarray, species: int, diagonal: bool) -> tuple[bool, bool]:
    """Does any `species` cluster wrap the torus in x / y?

    BFS with relative coordinates: a revisited neighbor whose recorded
    offset disagrees with the expected one by a multiple of L exposes a
    wrap.  `diagonal` adds corner connectivity (8-neighbor clusters).
    """
    L = grid.shape[0]
    steps = [(1, 0), (-1, 0), (0, 1), (0, -1)]
    if diagonal:
        steps += [(1, 1), (1, -1), (-1, 1), (-1, -1)]
    seen = {}
    wrap_x = wrap_y = False
    for start in zip(*np.nonzero(grid == species)):
        if tuple(start) in seen:
            continue
        seen[tuple(start)] = (0, 0)
        queue = [tuple(start)]
        while queue:
            y, x = queue.pop()
            oy, ox = seen[(y, x)]
            for dy, dx in steps:
                ny, nx = (y + dy) % L, (x + dx) % L
                if grid[ny, nx] != species:
                    continue
                offset = (oy + dy, ox + dx)
                if (ny, nx) in seen:
                    ry, rx = seen[(ny, nx)]
                    if rx != offset[1]:
                        wrap_x = True
                    if ry != offset[0]:
                        wrap_y = True
                else:
                    seen[(ny, nx)] = offset
                    queue.append((ny, nx))
    return wrap_x, wrap_y


def winding_exists_oracle(spins: np.ndarray, L: int) -> tuple[bool, bool]:
    """(wound in x, wound in y) from the flood-fill construction.

    A wall loop winds along an axis exactly when both species wrap that
    axis, with -1 clusters corner-connected (matching the wall tracer's
    crossing rule) and +1 clusters bond-connected.
    """
    grid = spins.reshape(L, L)
    px, py = wrap_directions(grid, 1, diagonal=False)
    mx, my = wrap_directions(grid, -1, diagonal=True)
    return (px and mx, py and my)


# ---------------------------------------------------------------------------
# Exhaustive classical thermodynamics (L = 4)
# ---------------------------------------------------------------------------

def enumerate_boltzmann(L: int, T: float) -> dict:
    """Exact <e_z> and <m^2> by summing over all 2^(L^2) states."""
    n = L * L
    states = np.arange(2**n, dtype=np.uint64)
    spins = ((states[:, None] >> np.arange(n, dtype=np.uint64)) & np.uint64(1)).astype(np.int8)
    spins = 2 * spins - 1
    grid = spins.reshape(-1, L, L)
    e = -(
        (grid * np.roll(grid, -1, axis=1)).sum(axis=(1, 2))
        + (grid * np.roll(grid, -1, axis=2)).sum(axis=(1, 2))
    ).astype(np.float64)
    m = spins.sum(axis=1).astype(np.float64)
    w = np.exp(-(e - e.min()) / T)
    z = w.sum()
    return {
        "ez": float((w * e).sum() / z / n),
        "m2": float((w * (m / n) ** 2).sum() / z),
    }


def kaufman_log_z(L: int, K: float) -> float:
    """Exact log partition function of the L x L periodic Ising model
    (Kaufman's closed form), used for finite-size internal energies."""
    n = L
    # gamma_q: cosh gamma_q = cosh(2K)coth(2K) - cos(pi q / n), gamma_0 special
    c = math.cosh(2 * K) / math.tanh(2 * K)

    def gamma(q):
        if q == 0:
            return 2 * K + math.log(math.tanh(K))
        return math.acosh(c - math.cos(math.pi * q / n))

    def log_2cosh(x):
        ax = abs(x)
        return ax + math.log1p(math.exp(-2 * ax))

    def log_2sinh(x):
        ax = abs(x)
        if ax < 1e-300:
            return -math.inf
        return ax + math.log1p(-math.exp(-2 * ax))

    t1 = sum(log_2cosh(n * gamma(2 * q + 1) / 2) for q in range(n))
    t2 = sum(log_2sinh(n * gamma(2 * q + 1) / 2) for q in range(n))
    t3 = sum(log_2cosh(n * gamma(2 * q) / 2) for q in range(n))
    t4 = sum(log_2sinh(n * abs(gamma(2 * q)) / 2) for q in range(n))
    # gamma_0 can be negative below Tc; its sign flips the fourth product
    sign4 = 1.0 if gamma(0) >= 0 else -1.0
    m = max(t1, t2, t3, t4)
    total = (
        math.exp(t1 - m) + math.exp(t2 - m) + math.exp(t3 - m) + sign4 * math.exp(t4 - m)
    )
    return 0.5 * n * n * math.log(2 * math.sinh(2 * K)) + m + math.log(total) - math.log(2)


def kaufman_energy_per_spin(L: int, T: float, h: float = 1e-6) -> float:
    """Exact e_z(L, T) = -(1/N) d lnZ / d beta via central difference in K."""
    k = 1.0 / T
    d = (kaufman_log_z(L, k + h) - kaufman_log_z(L, k - h)) / (2 * h)
    return -d / (L * L)


# ---------------------------------------------------------------------------
# Dense quantum oracle (unreduced Hilbert space)
# ---------------------------------------------------------------------------

class DenseTfim:
    """Full 2^N-dimensional TFIM on the L x L periodic lattice."""

    def __init__(self, L: int):
        self.L = L
        self.n = L * L
        n_states = 2**self.n
        states = np.arange(n_states)
        bits = (states[:, None] >> np.arange(self.n)) & 1
        self.spins = (2 * bits - 1).astype(np.int8)
        zz = np.zeros(n_states)
        for y in range(L):
            for x in range(L):
                i = y * L + x
                zz += self.spins[:, i] * self.spins[:, y * L + (x + 1) % L]
                zz += self.spins[:, i] * self.spins[:, ((y + 1) % L) * L + x]
        self.zz = zz
        self.mag = self.spins.sum(axis=1)
        flip = np.zeros((n_states, n_states))
        for i in range(self.n):
            flip[states ^ (1 << i), states] += 1.0
        self.flip = flip

    def hamiltonian(self, J: float, gamma: float) -> np.ndarray:
        return -J * np.diag(self.zz) - gamma * self.flip

    def anneal(self, t_max: float, probe_s, rtol=1e-12, atol=1e-12) -> np.ndarray:
        from scipy.integrate import solve_ivp

        psi0 = np.full(2**self.n, 1.0 / math.sqrt(2**self.n), dtype=complex)

        def rhs(t, y):
            s = t / t_max
            return 1j * ((s * s) * (self.zz * y) + (1 - s) ** 2 * (self.flip @ y))

        sol = solve_ivp(rhs, (0, t_max), psi0, method="DOP853",
                        t_eval=[p * t_max for p in probe_s], rtol=rtol, atol=atol)
        assert sol.success
        return sol.y

    def observables(self, psi: np.ndarray, s: float) -> dict:
        J, g = s * s, (1 - s) ** 2
        pr = np.abs(psi) ** 2
        m2 = float(pr @ (self.mag / self.n) ** 2)
        ez = -float(pr @ self.zz) / self.n
        e = float(-(J * (pr @ self.zz)) - g * np.real(np.vdot(psi, self.flip @ psi))) / self.n
        w, v = np.linalg.eigh(self.hamiltonian(J, g))
        manifold = np.abs(w - w[0]) < 1e-10 * max(1.0, abs(w[0]))
        fid = float(np.sum(np.abs(v[:, manifold].conj().T @ psi) ** 2))
        a0 = float(abs(psi[0]) ** 2 + abs(psi[-1]) ** 2)
        return {"m2": m2, "e": e, "ez": ez, "logF": -math.log(fid), "a0sq": a0}

    def born_probabilities(self, sector_state) -> np.ndarray:
        """|<c|psi>|^2 for all 2^N configurations from a sector state."""
        basis = sector_state.basis
        amps = np.zeros(2**self.n, dtype=complex)
        for c in range(2**self.n):
            r = basis.index_of(c)
            amps[c] = sector_state.amplitudes[r] / math.sqrt(basis.orbit_sizes[r])
        return np.abs(amps) ** 2


def burnside_dimension(L: int) -> int:
    """Sector dimension by Burnside's lemma over the full 16 L^2 group."""
    from ising_anneal.quantum.basis import group_permutations

    n = L * L
    perms = group_permutations(L)
    total = 0
    for p in perms:
        # cycle decomposition of the site permutation
        seen = np.zeros(n, dtype=bool)
        cycles = []
        for i in range(n):
            if seen[i]:
                continue
            length = 0
            j = i
            while not seen[j]:
                seen[j] = True
                j = p[j]
                length += 1
            cycles.append(length)
        total += 2 ** len(cycles)  # identity flip: free choice per cycle
        even = sum(1 for c in cycles if c % 2 == 0)
        total += 2**even if even == len(cycles) else 0  # spin flip: all cycles even
    return total // (2 * perms.shape[0])
