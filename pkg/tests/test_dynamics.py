import math

import numpy as np
import pytest

from ising_anneal import dynamics as dyn
from ising_anneal.constants import CONSTANTS
from ising_anneal.dynamics import AnnealSchedule, Outcome, ProbePlan
from ising_anneal.lattice import Boundary, ReplicaSet, SpinLattice, StripeKind, ising_energy
from ising_anneal.observables import m2 as m2_of
from ising_anneal.rng import RngStream
from ising_anneal.topology import winding_number

from oracles import enumerate_boltzmann

TC = CONSTANTS.t_c_classical


def test_schedule_protocol():
    sched = AnnealSchedule(4.0, 8)
    assert sched.temperature(0) == 4.0
    assert sched.temperature(8) == 0.0
    assert sched.velocity == 0.125
    temps = sched.temperatures()
    assert temps.shape == (8,)
    assert temps[0] == 4.0 and temps[-1] == pytest.approx(0.5)
    with pytest.raises(ValueError):
        AnnealSchedule(4.0, 0)


def test_bit_parallel_equals_scalar():
    gen = RngStream(21)
    lats = [SpinLattice.random(6, Boundary.PERIODIC, RngStream(100, b).generator()) for b in range(64)]
    reps = ReplicaSet.from_lattices(lats)
    dyn.metropolis_sweep(reps, 1.7, gen, n_sweeps=40)
    for b in (0, 7, 42, 63):
        lat = lats[b].copy()
        dyn.metropolis_sweep_scalar(lat, 1.7, gen, n_sweeps=40)
        assert np.array_equal(lat.spins, reps.replica(b).spins), f"replica {b} diverged"


def test_bit_parallel_equals_scalar_open():
    lats = [SpinLattice.random(5, Boundary.OPEN, RngStream(101, b).generator()) for b in range(64)]
    reps = ReplicaSet.from_lattices(lats)
    dyn.metropolis_sweep(reps, 0.9, RngStream(22), n_sweeps=30)
    for b in (3, 50):
        lat = lats[b].copy()
        dyn.metropolis_sweep_scalar(lat, 0.9, RngStream(22), n_sweeps=30)
        assert np.array_equal(lat.spins, reps.replica(b).spins)


def test_zero_temperature_freezes_all_up():
    reps = ReplicaSet.uniform(SpinLattice.all_up(8))
    before = reps.words.copy()
    dyn.metropolis_sweep(reps, 0.0, RngStream(1), n_sweeps=25)
    assert np.array_equal(before, reps.words)


def test_infinite_temperature_randomizes():
    reps = ReplicaSet.uniform(SpinLattice.all_up(16))
    dyn.metropolis_sweep(reps, math.inf, RngStream(2), n_sweeps=40)
    m = reps.bit_matrix().sum(axis=0) / 256.0
    assert np.mean(m**2) < 3.0 / 256.0 * 3  # ~1/N per replica


def test_zero_temperature_energy_monotone():
    lat = SpinLattice.random(16, Boundary.PERIODIC, RngStream(3).generator())
    prev = ising_energy(lat)
    for k in range(40):
        dyn.metropolis_sweep_scalar(lat, 0.0, RngStream(3, k))
        now = ising_energy(lat)
        assert now <= prev
        prev = now


def test_negative_temperature_rejected():
    reps = ReplicaSet.uniform(SpinLattice.all_up(4))
    with pytest.raises(ValueError):
        dyn.metropolis_sweep(reps, -1.0, RngStream(0))
    with pytest.raises(ValueError):
        dyn.sw_sweep(SpinLattice.all_up(4), 0.0, RngStream(0))


def _mc_mean_via_blocks(values, n_blocks=16):
    """Mean and blocked standard error (guards against autocorrelation)."""
    values = np.asarray(values, dtype=float)
    blocks = np.array_split(values, n_blocks)
    means = np.array([b.mean() for b in blocks])
    return float(values.mean()), float(means.std(ddof=1) / math.sqrt(n_blocks))


@pytest.mark.parametrize("T", [2.0, 3.0, 5.0])
def test_metropolis_detailed_balance_L4(T):
    exact = enumerate_boltzmann(4, T)
    lat = SpinLattice.random(4, Boundary.PERIODIC, RngStream(31).generator())
    dyn.metropolis_sweep_scalar(lat, T, RngStream(31, 0), n_sweeps=2000)
    ez, m2 = [], []
    state = RngStream(31, 1)
    from ising_anneal.lattice import cached_neighbor_table
    from ising_anneal import _kernels

    nbrs, nnbr = cached_neighbor_table(4, Boundary.PERIODIC)
    rstate = state.state()
    temps = np.full(4, T)
    for _ in range(30000):
        _kernels.metropolis_sweeps_scalar(lat.spins, nbrs, nnbr, temps, rstate)
        ez.append(ising_energy(lat) / 16.0)
        m2.append(m2_of(lat))
    for name, series, target in (("ez", ez, exact["ez"]), ("m2", m2, exact["m2"])):
        mean, err = _mc_mean_via_blocks(series)
        assert abs(mean - target) < 3 * err, f"{name}: {mean} vs exact {target} (3 sigma = {3*err})"


@pytest.mark.parametrize("T", [2.0, 3.0, 5.0])
def test_sw_detailed_balance_L4(T):
    exact = enumerate_boltzmann(4, T)
    lat = SpinLattice.random(4, Boundary.PERIODIC, RngStream(32).generator())
    dyn.sw_sweep(lat, T, RngStream(32, 0), n_sweeps=200)
    ez, m2 = [], []
    state = RngStream(32, 1).state()
    from ising_anneal import _kernels

    p_bond = 1.0 - math.exp(-2.0 / T)
    for _ in range(40000):
        _kernels.sw_sweep_kernel(lat.spins, 4, p_bond, True, state)
        ez.append(ising_energy(lat) / 16.0)
        m2.append(m2_of(lat))
    for name, series, target in (("ez", ez, exact["ez"]), ("m2", m2, exact["m2"])):
        mean, err = _mc_mean_via_blocks(series)
        assert abs(mean - target) < 3 * err, f"{name}: {mean} vs exact {target} (3 sigma = {3*err})"


def test_sw_bond_probability_at_tc():
    p = 1.0 - math.exp(-2.0 / TC)
    assert p == pytest.approx(1.0 - 1.0 / (1.0 + math.sqrt(2.0)), rel=1e-12)
    assert p == pytest.approx(0.5857864376, rel=1e-9)


def test_sw_high_temperature_randomizes():
    lat = SpinLattice.all_up(12)
    dyn.sw_sweep(lat, 1e6, RngStream(33))
    # p_bond ~ 2e-6: every site its own cluster, half flip
    assert 0.3 < np.mean(lat.spins == 1) < 0.7


def test_sw_metropolis_agree_off_critical():
    # L = 8, T = 2.5: the two samplers agree within combined errors
    L, T = 8, 2.5
    lat1 = SpinLattice.random(L, Boundary.PERIODIC, RngStream(34).generator())
    dyn.metropolis_sweep_scalar(lat1, T, RngStream(34, 0), n_sweeps=3000)
    from ising_anneal import _kernels
    from ising_anneal.lattice import cached_neighbor_table

    nbrs, nnbr = cached_neighbor_table(L, Boundary.PERIODIC)
    rs = RngStream(34, 1).state()
    temps = np.full(2, T)
    ez1 = []
    for _ in range(30000):
        _kernels.metropolis_sweeps_scalar(lat1.spins, nbrs, nnbr, temps, rs)
        ez1.append(ising_energy(lat1) / (L * L))
    lat2 = SpinLattice.random(L, Boundary.PERIODIC, RngStream(35).generator())
    dyn.sw_sweep(lat2, T, RngStream(35, 0), n_sweeps=300)
    st = RngStream(35, 1).state()
    p_bond = 1.0 - math.exp(-2.0 / T)
    ez2 = []
    for _ in range(20000):
        _kernels.sw_sweep_kernel(lat2.spins, L, p_bond, True, st)
        ez2.append(ising_energy(lat2) / (L * L))
    m1, e1 = _mc_mean_via_blocks(ez1)
    m2_, e2 = _mc_mean_via_blocks(ez2)
    assert abs(m1 - m2_) < 3 * math.hypot(e1, e2)


def test_equilibrate_modes():
    reps = ReplicaSet.random(8, Boundary.PERIODIC, RngStream(5))
    out = dyn.equilibrate(reps, 3.0, 10, RngStream(5, 1))
    assert out is reps
    lat = SpinLattice.random(8, Boundary.PERIODIC, RngStream(6).generator())
    out = dyn.equilibrate(lat, 3.0, 10, RngStream(6, 1))
    assert out is lat


def test_sa_run_single_sweep_high_T():
    # t_sa = 1: exactly one sweep at T_init; final state disordered
    sched = AnnealSchedule(4.0, 1)
    reps = ReplicaSet.random(16, Boundary.PERIODIC, RngStream(7))
    recs = dyn.sa_run(reps, sched, RngStream(7, 1), ProbePlan(winding=False))
    assert len(recs) == 1 and recs[0]["s"] == 1.0
    assert np.mean(recs[0]["m2"]) < 5.0 / 256.0  # O(1/N)


def test_sa_determinism():
    sched = AnnealSchedule(4.0, 64)
    out = []
    for _ in range(2):
        reps = ReplicaSet.random(12, Boundary.PERIODIC, RngStream(8, 3))
        recs = dyn.sa_run(reps, sched, RngStream(8, 4), ProbePlan.every_64th())
        out.append(np.concatenate([r["m2"] for r in recs]))
    assert np.array_equal(out[0], out[1])


def test_sa_probe_plan_indices():
    plan = ProbePlan.every_64th()
    idx = plan.sweep_indices(128)
    assert len(idx) == 64 and idx[0] == 2 and idx[-1] == 128
    assert ProbePlan((1.0,)).sweep_indices(100) == [100]


def test_anneal_to_temperature_stops_at_tc():
    sched = AnnealSchedule(2 * TC, 256)
    reps = ReplicaSet.random(8, Boundary.PERIODIC, RngStream(9))
    dyn.anneal_to_temperature(reps, sched, TC, RngStream(9, 1))
    with pytest.raises(ValueError):
        dyn.anneal_to_temperature(reps, sched, 3 * TC, RngStream(9, 2))


def test_fixed_t_decay_diagonal_terminates():
    rec = dyn.fixed_T_decay(StripeKind.DIAGONAL11, 16, 0.0, RngStream(10))
    assert rec.outcome is Outcome.WINDING_GONE
    assert rec.tau_d >= 1


def test_fixed_t_decay_horizontal_frozen_at_zero_T():
    rec = dyn.fixed_T_decay(StripeKind.HORIZONTAL10, 8, 0.0, RngStream(11), cap=500)
    assert rec.outcome is Outcome.TIMEOUT
    assert rec.tau_d == 500


def test_fixed_t_decay_validation():
    with pytest.raises(ValueError):
        dyn.fixed_T_decay(StripeKind.DIAGONAL_OPEN, 16, 0.5, RngStream(0))
    with pytest.raises(ValueError):
        dyn.fixed_T_decay(StripeKind.HORIZONTAL10, 16, -0.5, RngStream(0))


def test_open_diagonal_decay_outcomes():
    seen = set()
    for r in range(40):
        rec = dyn.open_diagonal_decay(12, RngStream(12, r))
        assert rec.outcome in (Outcome.FERRO, Outcome.STRAIGHT_WALL)
        seen.add(rec.outcome)
    assert seen == {Outcome.FERRO, Outcome.STRAIGHT_WALL}


def test_decay_statistics():
    recs = [dyn.DecayRecord(8, 0.0, StripeKind.DIAGONAL11, t, Outcome.WINDING_GONE) for t in (10, 20, 40)]
    recs.append(dyn.DecayRecord(8, 0.0, StripeKind.DIAGONAL11, 999, Outcome.TIMEOUT))
    stats = dyn.decay_statistics(recs)
    assert stats["n"] == 3 and stats["n_timeout"] == 1
    assert stats["tau_mean"] == pytest.approx(70.0 / 3.0)
    assert stats["tau_typical"] == pytest.approx((10 * 20 * 40) ** (1 / 3))


def test_winding_event_capture():
    sched = AnnealSchedule(4.0, 512)
    snaps = dyn.winding_event_capture(24, sched, 1.5, RngStream(13))
    for lat in snaps:
        assert tuple(winding_number(lat)) == (0, 0)
        # freshly severed stripes are far from ordered
        assert m2_of(lat) < 0.9
    with pytest.raises(ValueError):
        dyn.winding_event_capture(16, sched, 5.0, RngStream(14))
