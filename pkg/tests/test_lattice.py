import numpy as np
import pytest
from fractions import Fraction

from ising_anneal.lattice import (
    Boundary,
    ReplicaSet,
    SpinLattice,
    StripeKind,
    ising_energy,
    load_snapshot,
    load_text,
    local_field,
    magnetization,
    flip_cost,
    prepare_stripe,
    save_snapshot,
    save_text,
)
from ising_anneal.rng import RngStream


def test_energy_all_up_periodic():
    assert ising_energy(SpinLattice.all_up(4)) == -32  # -2N


def test_energy_all_up_periodic_sizes():
    for L in range(3, 17):
        assert ising_energy(SpinLattice.all_up(L)) == -2 * L * L
        assert ising_energy(SpinLattice.all_up(L, Boundary.OPEN)) == -2 * L * (L - 1)


def test_energy_single_flip_is_lowest_excitation():
    for L in (3, 4, 7):
        lat = SpinLattice.all_up(L)
        lat.spins[(L // 2) * L + L // 2] = -1
        assert ising_energy(lat) == -2 * L * L + 8


def test_magnetization_examples():
    lat = SpinLattice.all_up(4)
    assert magnetization(lat) == 16
    lat.spins[5] = -1
    assert magnetization(lat) == 14
    assert magnetization(SpinLattice.checkerboard(6)) == 0


def test_local_field_examples():
    up = SpinLattice.all_up(5)
    assert local_field(up, 7) == 4
    corner = SpinLattice.all_up(5, Boundary.OPEN)
    assert local_field(corner, 0) == 2
    cb = SpinLattice.checkerboard(4)
    site = 0
    assert cb.spins[site] == 1
    assert local_field(cb, site) == -4


def test_local_field_out_of_range():
    lat = SpinLattice.all_up(4)
    with pytest.raises(IndexError):
        local_field(lat, 16)
    with pytest.raises(IndexError):
        local_field(lat, -1)


def test_flip_cost_matches_energy_difference():
    gen = RngStream(11).generator()
    for _ in range(200):
        L = int(gen.choice([4, 5, 8]))
        boundary = Boundary.PERIODIC if gen.random() < 0.5 else Boundary.OPEN
        lat = SpinLattice.random(L, boundary, gen)
        site = int(gen.integers(0, L * L))
        before = ising_energy(lat)
        cost = flip_cost(lat, site)
        lat.spins[site] *= -1
        assert ising_energy(lat) - before == cost


def test_prepare_stripe_horizontal():
    lat = prepare_stripe(8, Boundary.PERIODIC, StripeKind.HORIZONTAL10)
    assert (lat.spins[: 2 * 8] == -1).all() and (lat.spins[2 * 8 :] == 1).all()
    # two smooth walls of length L on top of the ground state
    assert ising_energy(lat) == -2 * 64 + 4 * 8


def test_prepare_stripe_energy_L4():
    lat = prepare_stripe(4, Boundary.PERIODIC, StripeKind.HORIZONTAL10)
    assert ising_energy(lat) == -16  # -2N + 4L


def test_stripe_excess_energy_relation():
    # L(e_z - e_z0) = 4 for smooth horizontal walls
    for L in (4, 8, 12, 16):
        lat = prepare_stripe(L, Boundary.PERIODIC, StripeKind.HORIZONTAL10)
        ez = ising_energy(lat) / (L * L)
        assert L * (ez + 2.0) == pytest.approx(4.0)


def test_prepare_stripe_validation():
    with pytest.raises(ValueError):
        prepare_stripe(6, Boundary.PERIODIC, StripeKind.HORIZONTAL10)  # L/4 fractional
    with pytest.raises(ValueError):
        prepare_stripe(8, Boundary.OPEN, StripeKind.HORIZONTAL10)
    with pytest.raises(ValueError):
        prepare_stripe(8, Boundary.PERIODIC, StripeKind.DIAGONAL_OPEN, rng=RngStream(0))
    lat = prepare_stripe(8, Boundary.PERIODIC, StripeKind.HORIZONTAL10, Fraction(1, 2))
    assert magnetization(lat) == 0


def test_diagonal_open_construction():
    lat = prepare_stripe(16, Boundary.OPEN, StripeKind.DIAGONAL_OPEN, rng=RngStream(5))
    g = lat.grid()
    y, x = np.indices((16, 16))
    assert (g[y < x] == 1).all()
    assert (g[y > x] == -1).all()
    # diagonal sites random: both signs show up
    diag = np.diagonal(g)
    assert (diag == 1).any() and (diag == -1).any()


def test_replica_roundtrip():
    gen = RngStream(3).generator()
    lats = [SpinLattice.random(6, Boundary.PERIODIC, gen) for _ in range(64)]
    reps = ReplicaSet.from_lattices(lats)
    for b in (0, 17, 63):
        assert np.array_equal(reps.replica(b).spins, lats[b].spins)
    again = ReplicaSet.from_lattices(reps.replicas())
    assert np.array_equal(again.words, reps.words)


def test_bit_matrix_matches_replicas():
    reps = ReplicaSet.random(5, Boundary.PERIODIC, RngStream(9))
    mat = reps.bit_matrix()
    for b in (0, 31, 63):
        assert np.array_equal(mat[:, b], reps.replica(b).spins)


def test_snapshot_roundtrip(tmp_path):
    lat = SpinLattice.random(9, Boundary.OPEN, RngStream(1))
    path = tmp_path / "snap.isng"
    save_snapshot(lat, path)
    back = load_snapshot(path)
    assert back.L == 9 and back.boundary is Boundary.OPEN
    assert np.array_equal(back.spins, lat.spins)
    # header check
    raw = path.read_bytes()
    assert raw[:4] == b"ISNG"


def test_snapshot_rejects_garbage(tmp_path):
    path = tmp_path / "bad.isng"
    path.write_bytes(b"NOPE" + b"\x00" * 16)
    with pytest.raises(ValueError):
        load_snapshot(path)


def test_text_roundtrip(tmp_path):
    lat = SpinLattice.random(7, Boundary.PERIODIC, RngStream(2))
    path = tmp_path / "snap.txt"
    save_text(lat, path)
    back = load_text(path)
    assert np.array_equal(back.spins, lat.spins)
    content = path.read_text().splitlines()
    assert len(content) == 7 and set("".join(content)) <= {"+", "-"}
