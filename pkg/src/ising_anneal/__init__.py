"""ising-anneal: defects and their time scales in simulated and quantum
annealing of the 2D Ising model, at desk scale."""

from .constants import CONSTANTS, CriticalConstants
from .lattice import (
    Boundary,
    ReplicaSet,
    SpinLattice,
    StripeKind,
    ising_energy,
    local_field,
    magnetization,
    prepare_stripe,
)
from .rng import RngStream
from .topology import WallLoop, WindingNumber, trace_walls, winding_histogram, winding_number

__version__ = "0.1.0"

__all__ = [
    "Boundary",
    "CONSTANTS",
    "CriticalConstants",
    "ReplicaSet",
    "RngStream",
    "SpinLattice",
    "StripeKind",
    "WallLoop",
    "WindingNumber",
    "ising_energy",
    "local_field",
    "magnetization",
    "prepare_stripe",
    "trace_walls",
    "winding_histogram",
    "winding_number",
]
