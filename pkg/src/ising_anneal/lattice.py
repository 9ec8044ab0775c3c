"""Spin configurations on the L x L square lattice.

A :class:`SpinLattice` stores one +-1 configuration; a :class:`ReplicaSet`
packs 64 of them bit-parallel into one uint64 word per site (bit 1 means
spin +1).  Geometry is row-major, ``site = y*L + x``.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .rng import RngStream

SNAPSHOT_MAGIC = b"ISNG"
SNAPSHOT_VERSION = 1


class Boundary(enum.Enum):
    PERIODIC = "periodic"
    OPEN = "open"


def neighbor_table(L: int, boundary: Boundary) -> tuple[np.ndarray, np.ndarray]:
    """(nbrs, nnbr): per-site neighbor indices and counts.

    Neighbors are packed left-justified into a (N, 4) int32 table so the
    kernels never test sentinels; edge and corner sites of open lattices
    simply have nnbr < 4.
    """
    n = L * L
    nbrs = np.zeros((n, 4), dtype=np.int32)
    nnbr = np.zeros(n, dtype=np.int8)
    periodic = boundary is Boundary.PERIODIC
    for y in range(L):
        for x in range(L):
            i = y * L + x
            cand = []
            if periodic:
                cand = [
                    y * L + (x + 1) % L,
                    y * L + (x - 1) % L,
                    ((y + 1) % L) * L + x,
                    ((y - 1) % L) * L + x,
                ]
            else:
                if x + 1 < L:
                    cand.append(y * L + x + 1)
                if x > 0:
                    cand.append(y * L + x - 1)
                if y + 1 < L:
                    cand.append((y + 1) * L + x)
                if y > 0:
                    cand.append((y - 1) * L + x)
            nnbr[i] = len(cand)
            for j, c in enumerate(cand):
                nbrs[i, j] = c
    return nbrs, nnbr


_TABLE_CACHE: dict[tuple[int, Boundary], tuple[np.ndarray, np.ndarray]] = {}


def cached_neighbor_table(L: int, boundary: Boundary) -> tuple[np.ndarray, np.ndarray]:
    key = (L, boundary)
    if key not in _TABLE_CACHE:
        _TABLE_CACHE[key] = neighbor_table(L, boundary)
    return _TABLE_CACHE[key]


class StripeKind(enum.Enum):
    HORIZONTAL10 = "horizontal10"
    DIAGONAL11 = "diagonal11"
    DIAGONAL_OPEN = "diagonal_open"


@dataclass
class SpinLattice:
    """One +-1 configuration. spins is int8, shape (L*L,)."""

    L: int
    boundary: Boundary
    spins: np.ndarray

    def __post_init__(self):
        if self.L <= 0:
            raise ValueError("L must be positive")
        self.spins = np.ascontiguousarray(self.spins, dtype=np.int8)
        if self.spins.shape != (self.L * self.L,):
            raise ValueError(f"expected {self.L * self.L} spins, got {self.spins.shape}")
        if not np.all(np.abs(self.spins) == 1):
            raise ValueError("spins must be +-1")

    @property
    def n(self) -> int:
        return self.L * self.L

    def grid(self) -> np.ndarray:
        """(L, L) view, [y, x] indexing."""
        return self.spins.reshape(self.L, self.L)

    def copy(self) -> "SpinLattice":
        return SpinLattice(self.L, self.boundary, self.spins.copy())

    @classmethod
    def all_up(cls, L: int, boundary: Boundary = Boundary.PERIODIC) -> "SpinLattice":
        return cls(L, boundary, np.ones(L * L, dtype=np.int8))

    @classmethod
    def random(cls, L: int, boundary: Boundary, rng: RngStream | np.random.Generator) -> "SpinLattice":
        gen = rng.generator() if isinstance(rng, RngStream) else rng
        spins = (2 * gen.integers(0, 2, size=L * L) - 1).astype(np.int8)
        return cls(L, boundary, spins)

    @classmethod
    def checkerboard(cls, L: int, boundary: Boundary = Boundary.PERIODIC) -> "SpinLattice":
        y, x = np.indices((L, L))
        spins = np.where((x + y) % 2 == 0, 1, -1).astype(np.int8).ravel()
        return cls(L, boundary, spins)

    # -- packed-bit views -------------------------------------------------

    def packed_bits(self) -> np.ndarray:
        """ceil(N/8) bytes, bit 1 for spin +1, little-endian bit order."""
        return np.packbits((self.spins > 0).astype(np.uint8), bitorder="little")

    @classmethod
    def from_packed_bits(cls, L: int, boundary: Boundary, raw: np.ndarray) -> "SpinLattice":
        bits = np.unpackbits(raw, count=L * L, bitorder="little")
        return cls(L, boundary, (2 * bits.astype(np.int8) - 1))


def ising_energy(lat: SpinLattice) -> int:
    """Total energy -sum_<ij> s_i s_j over nearest-neighbor bonds, J = 1."""
    g = lat.grid().astype(np.int64)
    if lat.boundary is Boundary.PERIODIC:
        e = np.sum(g * np.roll(g, -1, axis=0)) + np.sum(g * np.roll(g, -1, axis=1))
    else:
        e = np.sum(g[:-1, :] * g[1:, :]) + np.sum(g[:, :-1] * g[:, 1:])
    return int(-e)


def magnetization(lat: SpinLattice) -> int:
    """Total magnetization M = sum_i s_i."""
    return int(lat.spins.sum(dtype=np.int64))


def local_field(lat: SpinLattice, site: int) -> int:
    """Sum of the neighboring spins; the flip cost is 2*s_site*field."""
    if not 0 <= site < lat.n:
        raise IndexError(f"site {site} outside [0, {lat.n})")
    nbrs, nnbr = cached_neighbor_table(lat.L, lat.boundary)
    return int(lat.spins[nbrs[site, : nnbr[site]]].sum())


def flip_cost(lat: SpinLattice, site: int) -> int:
    return 2 * int(lat.spins[site]) * local_field(lat, site)


def prepare_stripe(
    L: int,
    boundary: Boundary,
    kind: StripeKind,
    fraction: Fraction = Fraction(1, 4),
    rng: RngStream | np.random.Generator | None = None,
) -> SpinLattice:
    """Two-domain initial states used by the decay experiments.

    HORIZONTAL10: rows [0, fraction*L) down, rest up -> winding (1,0) with
    smooth walls.  DIAGONAL11: sites with (x+y) mod L < fraction*L down ->
    winding (1,1).  DIAGONAL_OPEN: up below the x=y diagonal, down above,
    random on it (open boundaries only).
    """
    fraction = Fraction(fraction)
    if kind is StripeKind.DIAGONAL_OPEN:
        if boundary is not Boundary.OPEN:
            raise ValueError("DIAGONAL_OPEN requires open boundaries")
        if rng is None:
            raise ValueError("DIAGONAL_OPEN needs an RNG for the diagonal sites")
        gen = rng.generator() if isinstance(rng, RngStream) else rng
        y, x = np.indices((L, L))
        spins = np.where(y < x, 1, -1).astype(np.int8)
        diag = (2 * gen.integers(0, 2, size=L) - 1).astype(np.int8)
        spins[np.arange(L), np.arange(L)] = diag
        return SpinLattice(L, boundary, spins.ravel())

    if boundary is not Boundary.PERIODIC:
        raise ValueError(f"{kind.value} requires periodic boundaries")
    width = fraction * L
    if width.denominator != 1 or not 0 < width.numerator < L:
        raise ValueError(f"fraction {fraction} does not give an integer stripe width on L={L}")
    w = width.numerator
    y, x = np.indices((L, L))
    if kind is StripeKind.HORIZONTAL10:
        spins = np.where(y < w, -1, 1).astype(np.int8)
    else:  # DIAGONAL11
        spins = np.where((x + y) % L < w, -1, 1).astype(np.int8)
    return SpinLattice(L, boundary, spins.ravel())


# ---------------------------------------------------------------------------
# 64-replica bit-parallel packing
# ---------------------------------------------------------------------------

@dataclass
class ReplicaSet:
    """64 replicas packed bit-parallel: bit b of words[i] is replica b, site i."""

    L: int
    boundary: Boundary
    words: np.ndarray

    def __post_init__(self):
        self.words = np.ascontiguousarray(self.words, dtype=np.uint64)
        if self.words.shape != (self.L * self.L,):
            raise ValueError("words must have one uint64 per site")

    @property
    def n(self) -> int:
        return self.L * self.L

    def copy(self) -> "ReplicaSet":
        return ReplicaSet(self.L, self.boundary, self.words.copy())

    @classmethod
    def from_lattices(cls, lats: list[SpinLattice]) -> "ReplicaSet":
        if len(lats) != 64:
            raise ValueError("need exactly 64 replicas")
        L, boundary = lats[0].L, lats[0].boundary
        words = np.zeros(L * L, dtype=np.uint64)
        for b, lat in enumerate(lats):
            if lat.L != L or lat.boundary != boundary:
                raise ValueError("replicas must share L and boundary")
            words |= ((lat.spins > 0).astype(np.uint64) << np.uint64(b))
        return cls(L, boundary, words)

    @classmethod
    def random(cls, L: int, boundary: Boundary, rng: RngStream | np.random.Generator) -> "ReplicaSet":
        """64 independently random replicas (the T = infinity ensemble)."""
        gen = rng.generator() if isinstance(rng, RngStream) else rng
        words = gen.integers(0, 2**64, size=L * L, dtype=np.uint64)
        return cls(L, boundary, words)

    @classmethod
    def uniform(cls, lat: SpinLattice) -> "ReplicaSet":
        """All 64 replicas equal to the given configuration."""
        words = np.where(lat.spins > 0, np.uint64(0xFFFFFFFFFFFFFFFF), np.uint64(0))
        return cls(lat.L, lat.boundary, words.astype(np.uint64))

    def bit_matrix(self) -> np.ndarray:
        """(N, 64) int8 +-1 matrix; column b is replica b."""
        bits = np.unpackbits(self.words.view(np.uint8).reshape(self.n, 8), axis=1, bitorder="little")
        return (2 * bits.astype(np.int8) - 1)

    def replica(self, b: int) -> SpinLattice:
        if not 0 <= b < 64:
            raise IndexError("replica index outside [0, 64)")
        bits = (self.words >> np.uint64(b)) & np.uint64(1)
        return SpinLattice(self.L, self.boundary, (2 * bits.astype(np.int8) - 1))

    def replicas(self) -> list[SpinLattice]:
        return [self.replica(b) for b in range(64)]


# ---------------------------------------------------------------------------
# Snapshot formats
# ---------------------------------------------------------------------------

def save_snapshot(lat: SpinLattice, path) -> None:
    """Binary snapshot: "ISNG" magic, u16 version, u16 L, u8 boundary,
    then ceil(L^2/8) bytes of packed spins, little-endian."""
    header = SNAPSHOT_MAGIC + struct.pack(
        "<HHB", SNAPSHOT_VERSION, lat.L, 0 if lat.boundary is Boundary.PERIODIC else 1
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(lat.packed_bits().tobytes())


def load_snapshot(path) -> SpinLattice:
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:4] != SNAPSHOT_MAGIC:
        raise ValueError(f"{path}: not a spin snapshot (bad magic)")
    version, L, bnd = struct.unpack("<HHB", raw[4:9])
    if version != SNAPSHOT_VERSION:
        raise ValueError(f"{path}: unsupported snapshot version {version}")
    boundary = Boundary.PERIODIC if bnd == 0 else Boundary.OPEN
    nbytes = (L * L + 7) // 8
    payload = np.frombuffer(raw[9 : 9 + nbytes], dtype=np.uint8)
    if payload.size != nbytes:
        raise ValueError(f"{path}: truncated snapshot")
    return SpinLattice.from_packed_bits(L, boundary, payload)


def save_text(lat: SpinLattice, path) -> None:
    """Plain text: L lines of L characters '+'/'-'."""
    g = lat.grid()
    with open(path, "w") as fh:
        for y in range(lat.L):
            fh.write("".join("+" if s > 0 else "-" for s in g[y]) + "\n")


def load_text(path, boundary: Boundary = Boundary.PERIODIC) -> SpinLattice:
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    L = len(lines)
    if any(len(ln) != L for ln in lines):
        raise ValueError(f"{path}: expected {L} lines of {L} characters")
    spins = np.array(
        [1 if c == "+" else -1 for ln in lines for c in ln], dtype=np.int8
    )
    return SpinLattice(L, boundary, spins)
