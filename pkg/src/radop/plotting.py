"""Optional figures for spectrum and numerical-range reports."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .operators import SpectrumReport  # noqa: E402


def plot_spectrum(report: SpectrumReport, path, title: str | None = None, show_values: bool = True) -> None:
    """Eigenvalues, limit points and the hull polygon in the complex plane."""
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    hull = np.asarray(report.hull, dtype=complex)
    if len(hull) >= 3:
        ax.fill(hull.real, hull.imag, color="0.9", zorder=0, label="numerical range")
        closed = np.append(hull, hull[0])
        ax.plot(closed.real, closed.imag, color="0.4", lw=1)
    elif len(hull) == 2:
        ax.plot(hull.real, hull.imag, color="0.4", lw=1, label="numerical range")
    if show_values:
        vals = np.asarray(report.values, dtype=complex)
        ax.scatter(vals.real, vals.imag, s=8, color="C0", label="eigenvalues", zorder=2)
    if report.limit_points:
        lp = np.asarray(report.limit_points, dtype=complex)
        ax.scatter(lp.real, lp.imag, s=40, marker="x", color="C3", label="limit points", zorder=3)
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    ax.set_aspect("equal", adjustable="datalim")
    ax.axhline(0, color="0.8", lw=0.5, zorder=0)
    ax.axvline(0, color="0.8", lw=0.5, zorder=0)
    if title:
        ax.set_title(title)
    ax.legend(loc="best", fontsize="small", frameon=False)
    fig.tight_layout()
    # fixed metadata keeps repeated renders byte-identical
    fig.savefig(path, metadata={"Software": None} if str(path).endswith(".png") else None)
    plt.close(fig)
