"""Scalar and Fourier observables of spin configurations.

All functions accept either a SpinLattice or a raw (N,) / (N, R) +-1
array plus L, so the per-replica bit matrices from the dynamics layer can
be processed without repacking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .lattice import SpinLattice
from .topology import WindingNumber


def _as_matrix(config, L=None):
    """Coerce to ((N, R) float view, L). Columns are replicas."""
    if isinstance(config, SpinLattice):
        return config.spins.reshape(-1, 1), config.L
    arr = np.asarray(config)
    if L is None:
        side = int(round(math.sqrt(arr.shape[0])))
        if side * side != arr.shape[0]:
            raise ValueError("cannot infer L; pass it explicitly")
        L = side
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    return arr, L


def m2(config, L=None):
    """Squared order parameter (sum_i s_i / N)^2 per replica."""
    arr, L = _as_matrix(config, L)
    n = L * L
    m = arr.sum(axis=0, dtype=np.int64) / n
    out = m * m
    return float(out[0]) if out.size == 1 else out


def ez(config, L=None, periodic=True):
    """Ising energy per spin, e_z = -(1/N) sum_<ij> s_i s_j."""
    arr, L = _as_matrix(config, L)
    g = arr.reshape(L, L, -1).astype(np.int64)
    if periodic:
        e = (g * np.roll(g, -1, axis=0)).sum(axis=(0, 1)) + (g * np.roll(g, -1, axis=1)).sum(axis=(0, 1))
    else:
        e = (g[:-1] * g[1:]).sum(axis=(0, 1)) + (g[:, :-1] * g[:, 1:]).sum(axis=(0, 1))
    out = -e / (L * L)
    return float(out[0]) if out.size == 1 else out


def mq(config, q, L=None):
    """Fourier mode m_q = (1/N) sum_xy s_xy exp(-i(x qx + y qy))."""
    arr, L = _as_matrix(config, L)
    qx, qy = q
    x = np.arange(L)
    phase = np.exp(-1j * qx * x)[None, :] * np.exp(-1j * qy * x)[:, None]  # [y, x]
    g = arr.reshape(L, L, -1)
    out = np.tensordot(phase, g, axes=([0, 1], [0, 1])) / (L * L)
    return complex(out[0]) if out.size == 1 else out


def mk2(config, L=None):
    """|m_kx|^2 + |m_ky|^2 at the longest axis wavelengths k = 2*pi/L.

    Detects system-spanning stripes parallel to either axis regardless of
    their orientation.
    """
    arr, L = _as_matrix(config, L)
    k = 2.0 * math.pi / L
    g = arr.reshape(L, L, -1)
    w = np.exp(-1j * k * np.arange(L))
    # sum over rows/columns first, then the single remaining axis
    col = g.sum(axis=0)  # [x, r]
    row = g.sum(axis=1)  # [y, r]
    n = L * L
    mkx = (w[:, None] * col).sum(axis=0) / n
    mky = (w[:, None] * row).sum(axis=0) / n
    out = np.abs(mkx) ** 2 + np.abs(mky) ** 2
    return float(out[0]) if out.size == 1 else out


def stripe_relation(m2_val, L):
    """m_k^2 of a smooth straight stripe with squared magnetization m2.

    2[1 - cos(pi(sqrt(m2)+1))] / (sin^2(pi/L) L^2): the continuum upper
    envelope of the (m^2, m_k^2) scatter for straight domains.
    """
    m2_val = np.asarray(m2_val, dtype=float)
    out = 2.0 * (1.0 - np.cos(math.pi * (np.sqrt(m2_val) + 1.0))) / (math.sin(math.pi / L) ** 2 * L * L)
    return float(out) if out.ndim == 0 else out


def square_domain_relation(m2_val, L):
    """m_k^2 vs m^2 for a single perfectly square minority domain.

    Continuum geometry, emitted as a reference curve for the scatter
    reports; carries no acceptance weight.  A w x w square has
    |m| = 1 - 2 w^2/N and |m_k| = (2w/N)(L/pi) sin(pi w / L) along each
    axis, summed in quadrature.
    """
    m2_val = np.asarray(m2_val, dtype=float)
    w = L * np.sqrt((1.0 - np.sqrt(m2_val)) / 2.0)
    amp = (2.0 * w / (math.pi * L)) * np.sin(math.pi * w / L)
    out = 2.0 * amp * amp
    return float(out) if out.ndim == 0 else out


def circle_domain_relation(m2_val, L):
    """m_k^2 vs m^2 for a single circular minority domain.

    The disk's row-sum profile transforms to a Bessel function:
    |m_k| = (2r/L) J1(2 pi r / L) per axis, with pi r^2 / N fixed by m^2.
    Reference curve only.
    """
    from scipy.special import j1

    m2_val = np.asarray(m2_val, dtype=float)
    r = L * np.sqrt((1.0 - np.sqrt(m2_val)) / (2.0 * math.pi))
    amp = (2.0 * r / L) * j1(2.0 * math.pi * r / L)
    out = 2.0 * amp * amp
    return float(out) if out.ndim == 0 else out


def md2(config, L=None):
    """Central domain-wall order parameter m_dx^2 + m_dy^2.

    r_x = +1 for x < L/2 and -1 otherwise (r_y likewise): picks up
    system-spanning walls near the lattice midlines; works for any
    boundary and is the open-boundary substitute for winding.
    """
    arr, L = _as_matrix(config, L)
    if L % 2:
        raise ValueError("md2 needs even L (the half-lattice split is ambiguous)")
    rx = np.where(np.arange(L) < L // 2, 1, -1)
    g = arr.reshape(L, L, -1)
    n = L * L
    mdx = (rx[None, :, None] * g).sum(axis=(0, 1)) / n
    mdy = (rx[:, None, None] * g).sum(axis=(0, 1)) / n
    out = mdx * mdx + mdy * mdy
    return float(out[0]) if out.size == 1 else out


# ---------------------------------------------------------------------------
# Record-level aggregation
# ---------------------------------------------------------------------------

@dataclass
class ObservableRecord:
    """One replica's observables at one probe time."""

    m2: float
    ez: float
    mk2: float = 0.0
    md2: float = 0.0
    winding: WindingNumber | None = None
    tags: dict = field(default_factory=dict)


def ground_state_probability(m2_values, n_sites) -> float:
    """Fraction of records with |M| = N exactly.

    m2 = 1 is detected through the integer magnetization criterion
    m2 >= (N - 1)/N to stay immune to floating-point rounding: the next
    magnetization below |M| = N is |M| = N - 2.
    """
    vals = np.asarray(m2_values, dtype=float)
    if vals.size == 0:
        raise ValueError("no records")
    cutoff = 1.0 - 1.0 / n_sites
    return float(np.mean(vals >= cutoff))


def group_stats(m2_values, n_sites=None, fraction=0.20) -> dict:
    """Fast/slow group statistics over per-replica m2 records.

    Sorts by m2; "fast" is the top `fraction` of records, "slow" the
    bottom.  Returns group means and, when n_sites is given, the group
    ground-state probabilities.
    """
    vals = np.sort(np.asarray(m2_values, dtype=float))
    n = vals.size
    if n < 5:
        raise ValueError("need at least 5 records to form groups")
    k = max(1, int(round(fraction * n)))
    slow, fast = vals[:k], vals[n - k :]
    out = {
        "fast_mean": float(fast.mean()),
        "slow_mean": float(slow.mean()),
        "fraction": fraction,
        "group_size": k,
    }
    if n_sites is not None:
        out["fast_p_gs"] = ground_state_probability(fast, n_sites)
        out["slow_p_gs"] = ground_state_probability(slow, n_sites)
    return out
