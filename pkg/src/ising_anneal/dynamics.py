"""Classical Monte Carlo dynamics: Metropolis sweeps (scalar and 64-way
bit-parallel), linear simulated annealing, Swendsen-Wang equilibrium
sampling, fixed-T stripe-decay harnesses, and winding-event capture.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _kernels, observables
from .lattice import (
    Boundary,
    ReplicaSet,
    SpinLattice,
    StripeKind,
    cached_neighbor_table,
    prepare_stripe,
)
from .rng import RngStream

DEFAULT_CAP_FACTOR = 1000  # decay sweep cap = factor * L^3


@dataclass(frozen=True)
class AnnealSchedule:
    """Linear ramp T(t) = T_init * (1 - t / t_sa) over t_sa MC sweeps.

    The velocity is v = 1/t_sa.  Sweep t (0-based) runs at T(t); the
    temperature is updated after each sweep and reaches zero when the
    last sweep has completed.
    """

    t_init: float
    t_sa: int

    def __post_init__(self):
        if self.t_sa < 1:
            raise ValueError("t_sa must be a positive number of sweeps")
        if self.t_init < 0:
            raise ValueError("t_init must be nonnegative")

    @property
    def velocity(self) -> float:
        return 1.0 / self.t_sa

    def temperature(self, t: int) -> float:
        return self.t_init * (1.0 - t / self.t_sa)

    def temperatures(self, start: int = 0, stop: int | None = None) -> np.ndarray:
        """Per-sweep temperatures for sweeps [start, stop)."""
        stop = self.t_sa if stop is None else stop
        t = np.arange(start, stop, dtype=np.float64)
        return self.t_init * (1.0 - t / self.t_sa)


class Outcome(enum.Enum):
    FERRO = "ferro"
    STRAIGHT_WALL = "straight_wall"
    WINDING_GONE = "winding_gone"
    TIMEOUT = "timeout"


@dataclass
class DecayRecord:
    """Result of one stripe-decay run."""

    L: int
    T: float
    kind: StripeKind
    tau_d: int
    outcome: Outcome


# ---------------------------------------------------------------------------
# Sweep-level operations
# ---------------------------------------------------------------------------

def metropolis_sweep(reps: ReplicaSet, T: float, rng: RngStream, n_sweeps: int = 1) -> ReplicaSet:
    """n_sweeps Metropolis sweeps at fixed T on all 64 replicas in place.

    Each attempt draws one site and one uniform shared by the replicas;
    acceptance is evaluated bitwise against exp(-dE/T) for the positive
    flip costs.  T = 0 freezes every dE > 0 move.
    """
    if T < 0:
        raise ValueError("temperature must be nonnegative")
    nbrs, nnbr = cached_neighbor_table(reps.L, reps.boundary)
    temps = np.full(n_sweeps, T, dtype=np.float64)
    _kernels.metropolis_sweeps_words(reps.words, nbrs, nnbr, temps, rng.state())
    return reps


def metropolis_sweep_scalar(lat: SpinLattice, T: float, rng: RngStream, n_sweeps: int = 1) -> SpinLattice:
    """Scalar-mode sweeps consuming the same stream layout as the
    bit-parallel kernel (reference for equivalence checks, and for runs
    that must not share randomness across replicas)."""
    if T < 0:
        raise ValueError("temperature must be nonnegative")
    nbrs, nnbr = cached_neighbor_table(lat.L, lat.boundary)
    temps = np.full(n_sweeps, T, dtype=np.float64)
    _kernels.metropolis_sweeps_scalar(lat.spins, nbrs, nnbr, temps, rng.state())
    return lat


def equilibrate(
    target: ReplicaSet | SpinLattice,
    T: float,
    n_sweeps: int,
    rng: RngStream,
) -> ReplicaSet | SpinLattice:
    """Fixed-T Metropolis from the current state (callers usually start
    from SpinLattice.random / ReplicaSet.random)."""
    if isinstance(target, ReplicaSet):
        return metropolis_sweep(target, T, rng.child("equilibrate"), n_sweeps)
    return metropolis_sweep_scalar(target, T, rng.child("equilibrate"), n_sweeps)


def sw_sweep(lat: SpinLattice, T: float, rng: RngStream, n_sweeps: int = 1) -> SpinLattice:
    """Swendsen-Wang updates: aligned bonds activated with
    p = 1 - exp(-2/T); clusters flipped with probability 1/2."""
    if T <= 0:
        raise ValueError("Swendsen-Wang needs T > 0 (p_bond -> 1 freezes the cluster map)")
    p_bond = 1.0 - math.exp(-2.0 / T)
    state = rng.state()
    periodic = lat.boundary is Boundary.PERIODIC
    for _ in range(n_sweeps):
        _kernels.sw_sweep_kernel(lat.spins, lat.L, p_bond, periodic, state)
    return lat


# ---------------------------------------------------------------------------
# Simulated annealing
# ---------------------------------------------------------------------------

@dataclass
class ProbePlan:
    """Which sweeps to measure, and what.

    fractions are probe times as multiples of t_sa (1.0 = final state).
    Winding tracing costs O(N) per replica, so it can be switched off for
    runs that only need scalar observables.
    """

    fractions: tuple = (1.0,)
    winding: bool = True
    fourier: bool = True

    @classmethod
    def every_64th(cls, winding: bool = True) -> "ProbePlan":
        return cls(tuple((k + 1) / 64 for k in range(64)), winding=winding)

    def sweep_indices(self, t_sa: int) -> list[int]:
        idx = sorted({min(t_sa, max(0, int(round(f * t_sa)))) for f in self.fractions})
        return idx


def _measure_replicas(reps: ReplicaSet, plan: ProbePlan) -> dict:
    """Per-replica observables of a ReplicaSet as arrays of length 64."""
    mat = reps.bit_matrix()  # (N, 64) +-1
    L = reps.L
    n = reps.n
    msum = mat.sum(axis=0, dtype=np.int64)
    out = {
        "m2": (msum / n) ** 2,
        "ez": observables.ez(mat, L, periodic=reps.boundary is Boundary.PERIODIC),
        "M": msum,
    }
    if plan.fourier:
        out["mk2"] = observables.mk2(mat, L)
        out["md2"] = observables.md2(mat, L) if L % 2 == 0 else np.zeros(64)
    if plan.winding and reps.boundary is Boundary.PERIODIC:
        w = _kernels.replica_windings(reps.words, L)
        out["wx"] = w[:, 0]
        out["wy"] = w[:, 1]
        out["w2"] = w[:, 2]
    return out


def sa_run(
    reps: ReplicaSet,
    sched: AnnealSchedule,
    rng: RngStream,
    probes: ProbePlan | None = None,
) -> list[dict]:
    """Run one simulated-annealing block of 64 replicas.

    Returns one record per probe: {"s", "sweep", "T", <observable arrays
    of length 64>}.  The final state (s = 1) is always measured when the
    plan requests fraction 1.0.  The caller is responsible for having
    equilibrated reps at sched.t_init.
    """
    probes = probes or ProbePlan()
    nbrs, nnbr = cached_neighbor_table(reps.L, reps.boundary)
    state = rng.state()
    records = []
    prev = 0
    for sweep_idx in probes.sweep_indices(sched.t_sa):
        if sweep_idx > prev:
            temps = sched.temperatures(prev, sweep_idx)
            _kernels.metropolis_sweeps_words(reps.words, nbrs, nnbr, temps, state)
            prev = sweep_idx
        rec = {
            "s": sweep_idx / sched.t_sa,
            "sweep": sweep_idx,
            "T": sched.temperature(sweep_idx),
        }
        rec.update(_measure_replicas(reps, probes))
        records.append(rec)
    return records


def sa_block(
    L: int,
    boundary: Boundary,
    sched: AnnealSchedule,
    rng: RngStream,
    probes: ProbePlan | None = None,
    n_equil: int = 32,
) -> list[dict]:
    """Convenience wrapper: random start, equilibration at T_init, anneal."""
    reps = ReplicaSet.random(L, boundary, rng.child("init"))
    if n_equil > 0:
        metropolis_sweep(reps, sched.t_init, rng.child("equilibrate"), n_equil)
    return sa_run(reps, sched, rng.child("anneal"), probes)


def anneal_to_temperature(
    reps: ReplicaSet,
    sched: AnnealSchedule,
    T_stop: float,
    rng: RngStream,
) -> ReplicaSet:
    """Anneal until T(t) first drops to (or below) T_stop; returns reps.

    Used for the runs measured at T_c rather than at the end of the ramp.
    """
    if T_stop > sched.t_init:
        raise ValueError("T_stop above T_init: nothing to anneal")
    t_stop = min(sched.t_sa, int(math.ceil(sched.t_sa * (1.0 - T_stop / sched.t_init))))
    nbrs, nnbr = cached_neighbor_table(reps.L, reps.boundary)
    temps = sched.temperatures(0, t_stop)
    _kernels.metropolis_sweeps_words(reps.words, nbrs, nnbr, temps, rng.state())
    return reps


# ---------------------------------------------------------------------------
# Fixed-temperature decay of imposed stripes
# ---------------------------------------------------------------------------

def fixed_T_decay(
    kind: StripeKind,
    L: int,
    T: float,
    rng: RngStream,
    fraction: Fraction = Fraction(1, 4),
    cap: int | None = None,
) -> DecayRecord:
    """Decay of an imposed winding stripe at fixed T.

    Prepares the stripe, runs Metropolis sweeps, checks the winding after
    every sweep, and stops at the first W = (0,0).  A sweep cap (default
    1000 * L^3) turns never-decaying runs (smooth horizontal walls at
    T = 0) into TIMEOUT records instead of hanging.
    """
    if kind not in (StripeKind.HORIZONTAL10, StripeKind.DIAGONAL11):
        raise ValueError("fixed_T_decay takes HORIZONTAL10 or DIAGONAL11")
    if T < 0:
        raise ValueError("temperature must be nonnegative")
    cap = cap if cap is not None else DEFAULT_CAP_FACTOR * L**3
    lat = prepare_stripe(L, Boundary.PERIODIC, kind, fraction)
    nbrs, nnbr = cached_neighbor_table(L, Boundary.PERIODIC)
    tau, code = _kernels.fixed_t_decay_kernel(lat.spins, nbrs, nnbr, L, T, cap, rng.state())
    outcome = Outcome.WINDING_GONE if code == 0 else Outcome.TIMEOUT
    return DecayRecord(L=L, T=T, kind=kind, tau_d=int(tau), outcome=outcome)


def open_diagonal_decay(L: int, rng: RngStream, cap: int | None = None) -> DecayRecord:
    """Zero-T decay of a corner-to-corner diagonal wall on an open lattice.

    Stops at the first fully ferromagnetic state or at the first single
    straight (horizontal or vertical) wall, the two absorbing states of
    the zero-T dynamics.
    """
    cap = cap if cap is not None else DEFAULT_CAP_FACTOR * L**3
    lat = prepare_stripe(L, Boundary.OPEN, StripeKind.DIAGONAL_OPEN, rng=rng.child("diag"))
    nbrs, nnbr = cached_neighbor_table(L, Boundary.OPEN)
    tau, code = _kernels.open_diag_decay_kernel(lat.spins, nbrs, nnbr, L, cap, rng.child("mc").state())
    outcome = (Outcome.FERRO, Outcome.STRAIGHT_WALL, Outcome.TIMEOUT)[code]
    return DecayRecord(L=L, T=0.0, kind=StripeKind.DIAGONAL_OPEN, tau_d=int(tau), outcome=outcome)


def decay_statistics(records: list[DecayRecord]) -> dict:
    """Mean and typical (exp<ln tau>) decay times; timeouts are reported
    separately and excluded from the averages."""
    taus = np.array([r.tau_d for r in records if r.outcome is not Outcome.TIMEOUT], dtype=float)
    n_timeout = sum(1 for r in records if r.outcome is Outcome.TIMEOUT)
    if taus.size == 0:
        return {"n": 0, "n_timeout": n_timeout}
    log_taus = np.log(taus)
    return {
        "n": int(taus.size),
        "n_timeout": n_timeout,
        "tau_mean": float(taus.mean()),
        "tau_mean_err": float(taus.std(ddof=1) / math.sqrt(taus.size)) if taus.size > 1 else 0.0,
        "tau_typical": float(np.exp(log_taus.mean())),
        "tau_typical_err": float(
            np.exp(log_taus.mean()) * log_taus.std(ddof=1) / math.sqrt(taus.size)
        )
        if taus.size > 1
        else 0.0,
    }


# ---------------------------------------------------------------------------
# Winding-event capture
# ---------------------------------------------------------------------------

def winding_event_capture(
    L: int,
    sched: AnnealSchedule,
    T_star: float,
    rng: RngStream,
    n_equil: int = 32,
) -> list[SpinLattice]:
    """Snapshots of stripe domains shortly after they break.

    Runs one 64-replica SA block; replicas with zero winding when the
    ramp reaches T_star are discarded, and each surviving replica is
    snapshotted at the first subsequent sweep where its winding turns
    (0,0).  Replicas still wound at T = 0 produce no snapshot.
    """
    if T_star > sched.t_init:
        raise ValueError("T_star above T_init: invalid threshold")
    reps = ReplicaSet.random(L, Boundary.PERIODIC, rng.child("init"))
    metropolis_sweep(reps, sched.t_init, rng.child("equilibrate"), n_equil)

    t_star = min(sched.t_sa, int(math.ceil(sched.t_sa * (1.0 - T_star / sched.t_init))))
    nbrs, nnbr = cached_neighbor_table(L, Boundary.PERIODIC)
    state = rng.child("anneal").state()
    temps = sched.temperatures(0, t_star)
    _kernels.metropolis_sweeps_words(reps.words, nbrs, nnbr, temps, state)

    wind = _kernels.replica_windings(reps.words, L)
    armed = (wind[:, 0] > 0) | (wind[:, 1] > 0)
    snapshots: list[SpinLattice] = []
    for t in range(t_star, sched.t_sa):
        if not armed.any():
            break
        temps = sched.temperatures(t, t + 1)
        _kernels.metropolis_sweeps_words(reps.words, nbrs, nnbr, temps, state)
        for b in np.flatnonzero(armed):
            spins = _kernels.extract_replica(reps.words, int(b))
            wx, wy, _, _, _ = _kernels.winding_summary(spins, L)
            if wx == 0 and wy == 0:
                snapshots.append(SpinLattice(L, Boundary.PERIODIC, spins))
                armed[b] = False
    return snapshots
