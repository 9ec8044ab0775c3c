"""Critical points, exponents, and derived scaling constants.

Everything the analysis layer needs lives here so that no exponent is
hard-coded at a call site.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class CriticalConstants:
    """Quantum (2+1D Ising) and classical (2D Ising) critical data.

    The quantum transverse-field critical coupling and the 3D Ising
    scaling dimensions are literature values; the classical entries are
    the exact Onsager temperature and the local-update dynamic exponent.
    """

    gamma_over_j_c: float = 3.04458
    z_quantum: float = 1.0
    one_over_nu_quantum: float = 1.587375
    two_beta_over_nu_quantum: float = 1.036298
    delta_e_quantum: float = 3.0  # d + z

    t_c_classical: float = 2.0 / math.log(1.0 + math.sqrt(2.0))
    z_classical: float = 2.17
    nu_classical: float = 1.0

    @property
    def s_c(self) -> float:
        """Schedule fraction where the quadratic ramp crosses (Gamma/J)_c."""
        return 1.0 / (1.0 + math.sqrt(self.gamma_over_j_c))

    @property
    def kz_exponent_quantum(self) -> float:
        """z + 1/nu for the quantum transition (~2.587)."""
        return self.z_quantum + self.one_over_nu_quantum

    @property
    def kz_exponent_classical(self) -> float:
        """z + 1/nu for local-update classical dynamics (~3.17)."""
        return self.z_classical + 1.0 / self.nu_classical


CONSTANTS = CriticalConstants()

# Ground-state Ising energy per spin on a periodic lattice (units of J).
EZ_GROUND_PERIODIC = -2.0

# Exact Onsager internal energy per spin at T_c (infinite lattice).
ONSAGER_U_TC = -math.sqrt(2.0)

# Fixed-T interface exponent for diagonal, winding-(1,1) stripes and the
# typical-time variant, as used for contrast axes in the analysis layer.
DIAGONAL_MEAN_EXPONENT = 3.42
DIAGONAL_TYPICAL_EXPONENT = 3.556
