"""Exact quantum annealing of the transverse-field Ising model in the
fully symmetric sector."""

from .basis import SymmetrySectorBasis, build_basis, estimate_memory_bytes
from .evolve import QASchedule, WaveState, default_probes, evolve, final_state, sample_configurations
from .hamiltonian import (
    ExcitedDeltas,
    a0_squared,
    apply_H,
    excited_deltas,
    fidelity,
    ground_state,
    log_fidelity,
    qa_observables,
)

__all__ = [
    "ExcitedDeltas",
    "QASchedule",
    "SymmetrySectorBasis",
    "WaveState",
    "a0_squared",
    "apply_H",
    "build_basis",
    "default_probes",
    "estimate_memory_bytes",
    "evolve",
    "excited_deltas",
    "fidelity",
    "final_state",
    "ground_state",
    "log_fidelity",
    "qa_observables",
    "sample_configurations",
]
