"""Matplotlib figures for the preset reports.

Figures are built on the Agg backend and returned as ``Figure`` objects;
:func:`save` writes them without a software tag so reruns give identical PNGs.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "figure.dpi": 100,
    "font.size": 9,
    "axes.linewidth": 0.6,
    "lines.linewidth": 1.2,
    "legend.frameon": False,
}
DPI_SAVE = 150


def save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=DPI_SAVE, metadata={"Software": None})
    plt.close(fig)
    return path


def fig1_row(tau, intensity, tau_peak, levels, populations, theta, density, grid, rho_bar):
    """Intensity, momentum populations, angular density and Wigner grid at the first peak."""
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, 4, figsize=(13, 3.0))
        ax = axes[0]
        ax.plot(tau, intensity, color="k")
        ax.axvline(tau_peak, color="0.6", ls="--", lw=0.8)
        ax.set_xlabel(r"$\tau$")
        ax.set_ylabel(r"$|A|^2$")
        ax.set_title(rf"$\bar\rho={rho_bar:g}$")

        ax = axes[1]
        ax.bar(levels, populations, width=0.8, color="C0")
        ax.set_xlabel("n")
        ax.set_ylabel(r"$P_n$ at first peak")

        ax = axes[2]
        ax.plot(theta, density, color="C3")
        ax.axhline(1 / (2 * np.pi), color="0.6", ls=":", lw=0.8)
        ax.set_xlim(theta[0], theta[-1])
        ax.set_xlabel(r"$\theta$")
        ax.set_ylabel(r"$|\psi|^2$")

        ax = axes[3]
        lim = np.max(np.abs(grid.values))
        dp = 1.0 / grid.rho_bar
        extent = (grid.theta[0], grid.theta[-1], grid.pbar[0] - dp / 2, grid.pbar[-1] + dp / 2)
        im = ax.imshow(grid.values, origin="lower", aspect="auto", extent=extent, cmap="RdBu_r", vmin=-lim, vmax=lim)
        ax.set_xlabel(r"$\theta$")
        ax.set_ylabel(r"$\bar p$")
        fig.colorbar(im, ax=ax, label="W")
        fig.tight_layout()
    return fig


def intensity_overlay(curves: dict, title="", log=False, xlabel=r"$\tau$", ylabel=r"$|A|^2$"):
    """One line per ``label -> (tau, intensity)``."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5.5, 3.5))
        styles = ["-", "--", ":", "-."]
        for k, (label, (tau, y)) in enumerate(curves.items()):
            ax.plot(tau, y, ls=styles[k % len(styles)], label=label)
        if log:
            ax.set_yscale("log")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        ax.set_title(title)
        ax.legend()
        fig.tight_layout()
    return fig


def growth_fit(tau, intensity, rate, rate_ref, t_fit):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5.5, 3.5))
        ax.semilogy(tau, intensity, color="k", label="simulation")
        i0 = int(np.searchsorted(tau, t_fit))
        ref = intensity[i0] * np.exp(rate_ref * (tau - tau[i0]))
        ax.semilogy(tau, ref, "--", color="C1", label=rf"$e^{{\sqrt{{3}}\,\tau}}$ (fit {rate:.4f})")
        ax.set_ylim(intensity.min() / 2, intensity.max() * 2)
        ax.set_xlabel(r"$\tau$")
        ax.set_ylabel(r"$|A|^2$")
        ax.legend()
        fig.tight_layout()
    return fig


def pulse_train(tau_prime, intensity, peak_times, literal_tau=None, literal_field=None, sech=None):
    with plt.rc_context(STYLE):
        ncols = 2 if literal_tau is not None else 1
        fig, axes = plt.subplots(1, ncols, figsize=(5.5 * ncols, 3.5), squeeze=False)
        ax = axes[0, 0]
        ax.plot(tau_prime, intensity, color="k")
        for t in peak_times:
            ax.axvline(t, color="0.7", lw=0.6, ls=":")
        ax.set_xlabel(r"$\tau'$")
        ax.set_ylabel(r"$|A'|^2$")
        ax.set_title("consistent reduction")
        if literal_tau is not None:
            ax = axes[0, 1]
            ax.plot(literal_tau, literal_field, color="k", label="A'")
            ax.plot(literal_tau, sech, "--", color="C1", label="2 sech")
            ax.set_xlabel(r"$\tau'$")
            ax.set_ylabel(r"$A'$")
            ax.set_title("literal variant, separatrix")
            ax.legend()
        fig.tight_layout()
    return fig
