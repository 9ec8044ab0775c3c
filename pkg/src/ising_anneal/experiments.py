"""Grid-point experiment drivers.

Each driver runs one grid point (one (L, v/T, ...) combination) and
returns its records.  The runner distributes these over workers; the
acceptance suite calls them directly.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from . import dynamics as dyn
from .dynamics import AnnealSchedule, Outcome, ProbePlan
from .lattice import Boundary, ReplicaSet, SpinLattice, StripeKind, save_snapshot
from .rng import RngStream
from .topology import winding_summary


def sa_point(
    L: int,
    t_sa: int,
    T_init: float,
    blocks: int,
    rng: RngStream,
    boundary: Boundary = Boundary.PERIODIC,
    probe: str = "end",
    n_equil: int = 32,
    winding: bool = True,
) -> list[dict]:
    """SA at one (L, v): `blocks` independent 64-replica blocks.

    probe: "end" measures the final T = 0 state only; "every64" probes at
    every 1/64 of the ramp (plus the end).
    """
    sched = AnnealSchedule(T_init, t_sa)
    plan = ProbePlan.every_64th(winding=winding) if probe == "every64" else ProbePlan(winding=winding)
    periodic = boundary is Boundary.PERIODIC
    records = []
    for blk in range(blocks):
        stream = rng.child("sa", blk)
        recs = dyn.sa_block(L, boundary, sched, stream, plan, n_equil=n_equil)
        for rec in recs:
            for b in range(64):
                row = {
                    "L": L,
                    "v": sched.velocity,
                    "s": rec["s"],
                    "T": rec["T"],
                    "m2": rec["m2"][b],
                    "ez": rec["ez"][b],
                    "mk2": rec["mk2"][b] if "mk2" in rec else None,
                    "md2": rec["md2"][b] if "md2" in rec else None,
                    "wx": int(rec["wx"][b]) if periodic and "wx" in rec else None,
                    "wy": int(rec["wy"][b]) if periodic and "wy" in rec else None,
                    "seed": stream.stream,
                    "block": blk,
                    "replica": b,
                }
                records.append(row)
    return records


def sa_to_temperature_point(
    L: int,
    t_sa: int,
    T_init: float,
    T_stop: float,
    blocks: int,
    rng: RngStream,
    n_equil: int = 32,
) -> list[dict]:
    """SA stopped when the ramp reaches T_stop; winding measured there."""
    sched = AnnealSchedule(T_init, t_sa)
    records = []
    for blk in range(blocks):
        stream = rng.child("sa_stop", blk)
        reps = ReplicaSet.random(L, Boundary.PERIODIC, stream.child("init"))
        dyn.metropolis_sweep(reps, T_init, stream.child("equilibrate"), n_equil)
        dyn.anneal_to_temperature(reps, sched, T_stop, stream.child("anneal"))
        meas = dyn._measure_replicas(reps, ProbePlan(winding=True))
        for b in range(64):
            records.append(
                {
                    "L": L,
                    "v": sched.velocity,
                    "s": None,
                    "T": T_stop,
                    "m2": meas["m2"][b],
                    "ez": meas["ez"][b],
                    "mk2": meas["mk2"][b],
                    "md2": meas["md2"][b],
                    "wx": int(meas["wx"][b]),
                    "wy": int(meas["wy"][b]),
                    "seed": stream.stream,
                    "block": blk,
                    "replica": b,
                }
            )
    return records


def sw_point(
    L: int,
    T: float,
    n_samples: int,
    rng: RngStream,
    therm: int = 64,
    boundary: Boundary = Boundary.PERIODIC,
    winding: bool = True,
) -> list[dict]:
    """Equilibrium Swendsen-Wang sampling at one (L, T)."""
    lat = SpinLattice.random(L, boundary, rng.child("init"))
    stream = rng.child("sw")
    dyn.sw_sweep(lat, T, stream.child("therm"), n_sweeps=therm)
    state = stream.child("run")
    records = []
    from . import _kernels, observables

    p_bond = 1.0 - math.exp(-2.0 / T)
    rstate = state.state()
    periodic = boundary is Boundary.PERIODIC
    for k in range(n_samples):
        _kernels.sw_sweep_kernel(lat.spins, L, p_bond, periodic, rstate)
        row = {
            "L": L,
            "T": T,
            "sweep": k,
            "m2": observables.m2(lat.spins, L),
            "ez": observables.ez(lat.spins, L, periodic=periodic),
            "seed": state.stream,
        }
        if winding and periodic:
            w = winding_summary(lat)
            row.update({"wx": w["wx"], "wy": w["wy"], "w2": w["w2"]})
        records.append(row)
    return records


def decay_point(
    kind: StripeKind,
    L: int,
    T: float,
    reps: int,
    rng: RngStream,
    fraction: Fraction = Fraction(1, 4),
    cap: int | None = None,
) -> list[dict]:
    """Repeated fixed-T stripe decays at one (kind, L, T)."""
    records = []
    for r in range(reps):
        stream = rng.child("decay", r)
        rec = dyn.fixed_T_decay(kind, L, T, stream, fraction=fraction, cap=cap)
        records.append(
            {
                "L": L,
                "T": T,
                "kind": kind.value,
                "rep": r,
                "tau": rec.tau_d,
                "outcome": rec.outcome.value,
                "seed": stream.stream,
            }
        )
    return records


def open_decay_point(L: int, reps: int, rng: RngStream, cap: int | None = None) -> list[dict]:
    """Repeated zero-T diagonal-wall decays on the open lattice."""
    records = []
    for r in range(reps):
        stream = rng.child("open_decay", r)
        rec = dyn.open_diagonal_decay(L, stream, cap=cap)
        records.append(
            {
                "L": L,
                "rep": r,
                "tau": rec.tau_d,
                "outcome": rec.outcome.value,
                "seed": stream.stream,
            }
        )
    return records


def capture_point(
    L: int,
    t_sa: int,
    T_init: float,
    T_star: float,
    blocks: int,
    rng: RngStream,
    out_dir=None,
) -> list[dict]:
    """Winding-event capture: snapshots of freshly severed stripes."""
    from pathlib import Path

    sched = AnnealSchedule(T_init, t_sa)
    records = []
    for blk in range(blocks):
        stream = rng.child("capture", blk)
        snaps = dyn.winding_event_capture(L, sched, T_star, stream)
        for i, lat in enumerate(snaps):
            row = {
                "L": L,
                "v": sched.velocity,
                "T_star": T_star,
                "block": blk,
                "index": i,
                "seed": stream.stream,
            }
            if out_dir is not None:
                path = Path(out_dir) / f"capture_L{L}_b{blk}_{i}.isng"
                path.parent.mkdir(parents=True, exist_ok=True)
                save_snapshot(lat, path)
                row["snapshot"] = path.name
            records.append(row)
    return records


def qa_point(
    L: int,
    t_max: float,
    rng: RngStream | None = None,
    probes=None,
    tol: float = 1e-12,
    cache_dir=None,
    sample_n: int = 0,
) -> list[dict]:
    """Exact QA at one (L, v): per-probe observables, optional sampling."""
    from .quantum import QASchedule, build_basis, evolve, sample_configurations
    from .quantum.evolve import WaveState

    basis = build_basis(L, cache_dir=cache_dir)
    sched = QASchedule(t_max)
    keep = sample_n > 0
    recs = evolve(basis, sched, probes=probes, keep_states=keep)
    records = []
    final_state = None
    for rec in recs:
        if keep and "state" in rec:
            if rec["s"] == 1.0:
                final_state = rec["state"]
            rec = {k: v for k, v in rec.items() if k != "state"}
        records.append(rec)
    if sample_n > 0 and final_state is not None:
        from . import observables

        spins = sample_configurations(final_state, sample_n, rng or RngStream(0))
        m2s = observables.m2(spins.T, L)
        mk2s = observables.mk2(spins.T, L)
        for i in range(sample_n):
            records.append(
                {
                    "L": L,
                    "v": sched.velocity,
                    "s": 1.0,
                    "sample": i,
                    "m2": float(np.atleast_1d(m2s)[i]),
                    "mk2": float(np.atleast_1d(mk2s)[i]),
                }
            )
    return records
