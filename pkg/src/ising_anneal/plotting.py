"""Figure rendering for the report path.

Every recipe writes its delimited tables first; these helpers draw the
companion PNGs.  Rendering is headless (Agg) and deterministic enough
for eyeballing; the CSVs stay the quantitative artifacts.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .observables import stripe_relation

_MARKERS = "osD^vP*Xh"


def _size_style(sizes):
    sizes = sorted(set(sizes))
    cmap = plt.get_cmap("viridis")
    return {
        L: {"color": cmap(i / max(len(sizes) - 1, 1)), "marker": _MARKERS[i % len(_MARKERS)]}
        for i, L in enumerate(sizes)
    }


def scaling_collapse_figure(series, panels, ylabel, path, log_axes=True):
    """One panel per (alpha, b, xlabel): y L^b against x L^alpha."""
    fig, axes = plt.subplots(1, len(panels), figsize=(4.2 * len(panels), 3.4), squeeze=False)
    style = _size_style(series.L)
    for ax, (alpha, b, xlabel) in zip(axes[0], panels):
        for L in sorted(set(series.L)):
            m = series.L == L
            xs = series.x[m] * L**alpha
            ys = series.y[m] * L**b
            es = series.yerr[m] * L**b
            order = np.argsort(xs)
            ax.errorbar(xs[order], ys[order], yerr=es[order], ms=4, lw=1, capsize=2,
                        label=f"L={int(L)}", **style[L])
        if log_axes:
            ax.set_xscale("log")
            if np.all(series.y > 0):
                ax.set_yscale("log")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def winding_sector_figure(rows, path):
    """rows: (L, T, p00, p10, p11, p21, w2_mean, n)."""
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    T = [r[1] for r in rows]
    for idx, label in ((2, "P(0,0)"), (3, "P(1,0)+(0,1)"), (4, "P(1,1)"), (5, "P(2,1)+(1,2)")):
        ax.plot(T, [r[idx] for r in rows], "-o", ms=3, label=label)
    ax.plot(T, [r[6] for r in rows], "r--", label="<w^2>")
    ax.set_xlabel("T")
    ax.set_ylabel("probability")
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def winding_vs_temperature_figure(rows, tc, path):
    """rows: (L, v, s, T, p10, p11, n) across the ramp."""
    fig, axes = plt.subplots(1, 2, figsize=(8.4, 3.4))
    vels = sorted({r[1] for r in rows})
    for v in vels:
        sub = sorted((r for r in rows if r[1] == v), key=lambda r: r[3])
        T = [r[3] for r in sub]
        axes[0].plot(T, [r[4] for r in sub], "-o", ms=3, label=f"v=2^{np.log2(v):.0f}")
        axes[1].plot(T, [r[5] for r in sub], "-o", ms=3)
    for ax, ylab in zip(axes, ("P(1,0)", "P(1,1)")):
        ax.axvline(tc, color="k", ls=":", lw=1)
        ax.set_xlabel("T")
        ax.set_ylabel(ylab)
        ax.invert_xaxis()
    axes[0].legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def decay_time_figure(branches, path, fits=None):
    """branches: {label: [(L, tau, err), ...]}; fits: {label: (c, a)}."""
    fig, ax = plt.subplots(figsize=(5.0, 3.8))
    for i, (label, pts) in enumerate(branches.items()):
        pts = sorted(pts)
        L = np.array([p[0] for p in pts], dtype=float)
        tau = np.array([p[1] for p in pts], dtype=float)
        err = np.array([p[2] for p in pts], dtype=float)
        ax.errorbar(L, tau, yerr=err, fmt=_MARKERS[i % len(_MARKERS)], ms=5, capsize=2, label=label)
        if fits and label in fits:
            c, a = fits[label]
            grid = np.geomspace(L.min(), L.max(), 64)
            ax.plot(grid, c * grid**a, "-", lw=1, label=f"{label}: L^{a:.2f}")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("L")
    ax.set_ylabel("decay time (sweeps)")
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def scatter_figure(rows, L, path):
    """rows: (L, v, m2, mk2) sampled configurations, one panel per v."""
    vels = sorted({r[1] for r in rows}, reverse=True)
    fig, axes = plt.subplots(1, len(vels), figsize=(3.6 * len(vels), 3.4), squeeze=False)
    grid = np.linspace(0, 1, 256)
    for ax, v in zip(axes[0], vels):
        pts = [(r[2], r[3]) for r in rows if r[1] == v]
        ax.plot([p[0] for p in pts], [p[1] for p in pts], ".", ms=2, alpha=0.25)
        ax.plot(grid, stripe_relation(grid, L), "k-", lw=1, label="straight stripe")
        ax.set_title(f"v = {v:g}")
        ax.set_xlabel("m^2")
        ax.set_ylabel("m_k^2")
    axes[0][0].legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def snapshot_figure(lats, path, ncols=4):
    """Spin-configuration gallery (capture output, stripe remnants)."""
    n = len(lats)
    if n == 0:
        return
    ncols = min(ncols, n)
    nrows = (n + ncols - 1) // ncols
    fig, axes = plt.subplots(nrows, ncols, figsize=(2.2 * ncols, 2.2 * nrows), squeeze=False)
    for ax in axes.ravel():
        ax.axis("off")
    for ax, lat in zip(axes.ravel(), lats):
        ax.imshow(lat.grid(), cmap="coolwarm", vmin=-1, vmax=1, interpolation="nearest")
        ax.axis("off")
    fig.tight_layout()
    _save(fig, path)


def _save(fig, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=130)
    plt.close(fig)
