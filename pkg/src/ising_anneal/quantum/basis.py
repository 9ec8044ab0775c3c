"""Fully symmetric sector of the L x L transverse-field Ising model.

The sector is spanned by orbit representatives under the 16 L^2-element
group: L^2 translations x 8 point-group elements x global spin flip.
Each representative is the minimal N-bit configuration of its orbit
(bit i of a configuration is site i, row-major; bit 1 means spin up),
and carries its orbit size, which fixes the symmetrized amplitudes.

The scan marks every configuration with its orbit index, so building
costs O(2^N * generators); results are cached on disk keyed by (L,
group version).
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numba import njit

from ..rng import stable_hash64

GROUP_VERSION = 1
L_MIN, L_MAX = 3, 6
LARGE_L_ENV = "ISING_ANNEAL_ALLOW_L6"


def _coord_maps(L: int) -> list:
    """The 8 point-group maps as (x, y) -> (x', y') callables."""
    m = L - 1
    return [
        lambda x, y: (x, y),
        lambda x, y: (m - y, x),       # rotate 90
        lambda x, y: (m - x, m - y),   # rotate 180
        lambda x, y: (y, m - x),       # rotate 270
        lambda x, y: (m - x, y),       # mirror x
        lambda x, y: (x, m - y),       # mirror y
        lambda x, y: (y, x),           # diagonal
        lambda x, y: (m - y, m - x),   # anti-diagonal
    ]


def point_group_permutations(L: int) -> np.ndarray:
    """(8, N) site permutations perm[g, i] = destination of site i."""
    n = L * L
    out = np.empty((8, n), dtype=np.int32)
    for g, f in enumerate(_coord_maps(L)):
        for y in range(L):
            for x in range(L):
                xp, yp = f(x, y)
                out[g, y * L + x] = yp * L + xp
    return out


def group_permutations(L: int) -> np.ndarray:
    """All 8 L^2 spatial permutations (point group after translation)."""
    n = L * L
    pg = point_group_permutations(L)
    out = np.empty((8 * n, n), dtype=np.int32)
    k = 0
    for g in range(8):
        for ty in range(L):
            for tx in range(L):
                for y in range(L):
                    for x in range(L):
                        i = y * L + x
                        j = ((y + ty) % L) * L + (x + tx) % L
                        out[k, i] = pg[g, j]
                k += 1
    return out


def generator_permutations(L: int) -> np.ndarray:
    """(4, N) generating set: +x translation, +y translation, r90, mirror."""
    n = L * L
    pg = point_group_permutations(L)
    gens = np.empty((4, n), dtype=np.int32)
    for y in range(L):
        for x in range(L):
            i = y * L + x
            gens[0, i] = y * L + (x + 1) % L
            gens[1, i] = ((y + 1) % L) * L + x
    gens[2] = pg[1]
    gens[3] = pg[4]
    return gens


@njit(cache=True)
def apply_perm(config, perm, n_sites):
    out = np.uint64(0)
    one = np.uint64(1)
    for i in range(n_sites):
        if (config >> np.uint64(i)) & one:
            out |= one << np.uint64(perm[i])
    return out


@njit(cache=True)
def _orbit_scan(n_sites, gens, reps_out, orbit_out, state2rep, stack):
    """Flood every orbit; returns the sector dimension or -1 on overflow."""
    n_states = np.int64(1) << np.int64(n_sites)
    mask = np.uint64(n_states - 1)
    cap = reps_out.shape[0]
    n_gens = gens.shape[0]
    d = 0
    for s64 in range(n_states):
        s = np.uint64(s64)
        if state2rep[s64] >= 0:
            continue
        if d >= cap:
            return -1
        state2rep[s64] = d
        stack[0] = s
        top = 1
        count = 0
        while top > 0:
            top -= 1
            c = stack[top]
            count += 1
            for g in range(n_gens):
                c2 = apply_perm(c, gens[g], n_sites)
                if state2rep[np.int64(c2)] < 0:
                    state2rep[np.int64(c2)] = d
                    stack[top] = c2
                    top += 1
            c2 = (~c) & mask  # global spin flip
            if state2rep[np.int64(c2)] < 0:
                state2rep[np.int64(c2)] = d
                stack[top] = c2
                top += 1
        reps_out[d] = s  # ascending scan: first member found is the minimum
        orbit_out[d] = count
        d += 1
    return d


@njit(cache=True)
def _build_tables(reps, orbit_sizes, state2rep, L):
    """Per-representative diagonal data and the flip adjacency in COO form.

    bond[r]  : sum of sigma^z sigma^z over the 2N periodic bonds,
    mag[r]   : |total magnetization|,
    (rows, cols, vals): sum_i sigma^x_i in the symmetrized basis, entry
    sqrt(orbit_r / orbit_r') per single-spin flip.
    """
    d = reps.shape[0]
    n = L * L
    one = np.uint64(1)
    bond = np.empty(d, dtype=np.int32)
    mag = np.empty(d, dtype=np.int32)
    rows = np.empty(d * n, dtype=np.int32)
    cols = np.empty(d * n, dtype=np.int32)
    vals = np.empty(d * n, dtype=np.float64)
    k = 0
    for r in range(d):
        c = reps[r]
        b = 0
        pop = 0
        for y in range(L):
            yp = y + 1 if y + 1 < L else 0
            for x in range(L):
                xp = x + 1 if x + 1 < L else 0
                i = y * L + x
                bi = (c >> np.uint64(i)) & one
                pop += np.int64(bi)
                br = (c >> np.uint64(y * L + xp)) & one
                bd = (c >> np.uint64(yp * L + x)) & one
                b += 1 if bi == br else -1
                b += 1 if bi == bd else -1
        bond[r] = b
        m = 2 * pop - n
        mag[r] = m if m >= 0 else -m
        for i in range(n):
            c2 = c ^ (one << np.uint64(i))
            r2 = state2rep[np.int64(c2)]
            rows[k] = r
            cols[k] = r2
            vals[k] = np.sqrt(orbit_sizes[r] / orbit_sizes[r2])
            k += 1
    return bond, mag, rows, cols, vals


@dataclass
class SymmetrySectorBasis:
    """Representatives and per-orbit data of the fully symmetric sector."""

    L: int
    reps: np.ndarray          # uint64, ascending
    orbit_sizes: np.ndarray   # int64
    bond_sums: np.ndarray     # int32, sum sigma.sigma per representative
    mag_abs: np.ndarray       # int32, |M| per representative
    flip_matrix: object       # scipy CSR, sum_i sigma^x_i in the sector

    @property
    def n_sites(self) -> int:
        return self.L * self.L

    @property
    def dim(self) -> int:
        return int(self.reps.size)

    def index_of(self, config: int) -> int:
        """Sector index of an arbitrary N-bit configuration."""
        rep = self.representative_of(config)
        i = int(np.searchsorted(self.reps, np.uint64(rep)))
        if i >= self.dim or self.reps[i] != np.uint64(rep):
            raise KeyError(f"configuration {config:#x} not mapped (corrupt basis?)")
        return i

    def representative_of(self, config: int) -> int:
        """Orbit minimum of a configuration (direct group sweep)."""
        n = self.n_sites
        perms = group_permutations(self.L)
        best = None
        mask = (1 << n) - 1
        for p in perms:
            img = int(apply_perm(np.uint64(config), p, n))
            for cand in (img, (~img) & mask):
                if best is None or cand < best:
                    best = cand
        return best

    def amplitude_map(self) -> np.ndarray:
        """sqrt(orbit_size / 2^N): sector amplitudes of |+...+>."""
        return np.sqrt(self.orbit_sizes / float(2**self.n_sites))


def estimate_memory_bytes(L: int) -> int:
    """Transient + resident footprint of building the L basis."""
    n_states = 2 ** (L * L)
    d_guess = max(n_states // (16 * L * L), 1)
    return 4 * n_states + d_guess * (8 + 8 + 4 + 4) + d_guess * L * L * 16


def default_cache_dir() -> Path:
    env = os.environ.get("ISING_ANNEAL_CACHE")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "ising_anneal"


def _cache_key(L: int) -> str:
    return f"basis_L{L}_g{GROUP_VERSION}.npz"


def build_basis(L: int, cache_dir: Path | str | None = None, use_cache: bool = True) -> SymmetrySectorBasis:
    """Construct (or load) the symmetric-sector basis for L in [3, 6].

    L = 6 has ~2e8 representatives and a ~275 GB scan footprint; it is
    gated behind ISING_ANNEAL_ALLOW_L6=1 and prints the estimate before
    allocating anything.
    """
    from scipy.sparse import coo_matrix

    if not L_MIN <= L <= L_MAX:
        raise ValueError(f"L={L} outside supported range [{L_MIN}, {L_MAX}] (memory guard)")
    if L >= 6:
        est = estimate_memory_bytes(L)
        print(f"[basis] L={L} scan needs ~{est / 1e9:.0f} GB")
        if os.environ.get(LARGE_L_ENV) != "1":
            raise MemoryError(
                f"L={L} basis construction is an opt-in long job; set {LARGE_L_ENV}=1 to proceed"
            )

    cache_dir = Path(cache_dir) if cache_dir else default_cache_dir()
    cache_path = cache_dir / _cache_key(L)
    if use_cache and cache_path.exists():
        basis = _load_cache(cache_path, L)
        if basis is not None:
            return basis

    n = L * L
    n_states = 1 << n
    gens = generator_permutations(L)
    cap = max(n_states // (16 * n) * 8, 1 << 16)
    reps = np.empty(cap, dtype=np.uint64)
    orbit = np.empty(cap, dtype=np.int64)
    state2rep = np.full(n_states, -1, dtype=np.int32)
    stack = np.empty(16 * n + 4, dtype=np.uint64)
    d = _orbit_scan(n, gens, reps, orbit, state2rep, stack)
    if d < 0:
        raise RuntimeError("orbit capacity estimate too small (unexpected)")
    reps = reps[:d].copy()
    orbit = orbit[:d].copy()
    assert int(orbit.sum()) == n_states, "orbit sizes must tile the Hilbert space"

    bond, mag, rows, cols, vals = _build_tables(reps, orbit, state2rep, L)
    del state2rep
    flip = coo_matrix((vals, (rows, cols)), shape=(d, d)).tocsr()
    flip = ((flip + flip.T) * 0.5).tocsr()  # exact Hermiticity despite fp rounding
    basis = SymmetrySectorBasis(L, reps, orbit, bond, mag, flip)
    if use_cache:
        _save_cache(cache_path, basis)
    return basis


def _save_cache(path: Path, basis: SymmetrySectorBasis) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    x = basis.flip_matrix
    checksum = stable_hash64(
        basis.L, GROUP_VERSION, basis.dim, int(basis.orbit_sizes.sum()),
        int(basis.bond_sums.sum()),
    )
    tmp = path.with_suffix(".tmp.npz")
    np.savez_compressed(
        tmp,
        version=np.int64(GROUP_VERSION),
        L=np.int64(basis.L),
        checksum=np.uint64(checksum),
        reps=basis.reps,
        orbit_sizes=basis.orbit_sizes,
        bond_sums=basis.bond_sums,
        mag_abs=basis.mag_abs,
        x_data=x.data,
        x_indices=x.indices,
        x_indptr=x.indptr,
    )
    os.replace(tmp, path)


def _load_cache(path: Path, L: int) -> SymmetrySectorBasis | None:
    from scipy.sparse import csr_matrix

    try:
        with np.load(path) as z:
            if int(z["version"]) != GROUP_VERSION or int(z["L"]) != L:
                return None
            reps = z["reps"]
            orbit = z["orbit_sizes"]
            bond = z["bond_sums"]
            mag = z["mag_abs"]
            expect = stable_hash64(L, GROUP_VERSION, reps.size, int(orbit.sum()), int(bond.sum()))
            if int(z["checksum"]) != expect:
                return None
            d = reps.size
            x = csr_matrix((z["x_data"], z["x_indices"], z["x_indptr"]), shape=(d, d))
            return SymmetrySectorBasis(L, reps, orbit, bond, mag, x)
    except Exception:
        return None
