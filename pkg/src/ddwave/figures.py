"""Matplotlib rendering of the CSV artifacts.

The CLI report paths call these to drop PNG files next to each delimited
output. The CSV stays the source of truth; figures are a convenience
view and can be disabled with --no-figures.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["save_heatmap", "save_ber_curves", "save_sensing_scatter", "save_heatmap_pair"]

_DPI = 140


def save_heatmap(
    values: np.ndarray,
    out_png: str | Path,
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
    db: bool = False,
) -> Path:
    """Render a magnitude grid; ``db`` switches to 20*log10 relative to peak."""
    values = np.asarray(values, dtype=float)
    plot_vals = values
    label = "magnitude"
    if db:
        peak = values.max() if values.size else 1.0
        floor = peak * 1e-6 if peak > 0 else 1.0
        plot_vals = 20 * np.log10(np.maximum(values, floor) / max(peak, floor))
        label = "dB rel. peak"
    fig, ax = plt.subplots(figsize=(5.2, 4.2))
    im = ax.imshow(plot_vals, aspect="auto", origin="upper", cmap="viridis")
    fig.colorbar(im, ax=ax, label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    fig.tight_layout()
    out_png = Path(out_png)
    fig.savefig(out_png, dpi=_DPI)
    plt.close(fig)
    return out_png


def save_heatmap_pair(
    left: np.ndarray,
    right: np.ndarray,
    out_png: str | Path,
    left_title: str,
    right_title: str,
    db: bool = True,
) -> Path:
    """Two magnitude grids side by side (effective-channel comparisons)."""
    fig, axes = plt.subplots(1, 2, figsize=(9.6, 4.2))
    for ax, vals, title in ((axes[0], left, left_title), (axes[1], right, right_title)):
        vals = np.asarray(vals, dtype=float)
        if db:
            peak = vals.max() if vals.size else 1.0
            floor = peak * 1e-6 if peak > 0 else 1.0
            vals = 20 * np.log10(np.maximum(vals, floor) / max(peak, floor))
        im = ax.imshow(vals, aspect="auto", origin="upper", cmap="viridis")
        fig.colorbar(im, ax=ax)
        ax.set_title(title)
        ax.set_xlabel("input bin")
        ax.set_ylabel("output bin")
    fig.tight_layout()
    out_png = Path(out_png)
    fig.savefig(out_png, dpi=_DPI)
    plt.close(fig)
    return out_png


def save_ber_curves(
    curves: dict[str, tuple[list[float], list[float]]],
    out_png: str | Path,
    title: str = "BER vs SNR",
) -> Path:
    """Semilog BER curves, one line per waveform. Zero-error points are
    drawn at a floor marker so they stay visible."""
    fig, ax = plt.subplots(figsize=(5.6, 4.2))
    floor = None
    for _, (_, bers) in curves.items():
        positive = [b for b in bers if b > 0]
        if positive:
            floor = min(positive) / 10 if floor is None else min(floor, min(positive) / 10)
    floor = floor or 1e-6
    for name, (snrs, bers) in sorted(curves.items()):
        plotted = [b if b > 0 else floor for b in bers]
        ax.semilogy(snrs, plotted, marker="o", label=name)
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("bit error rate")
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.4)
    ax.legend()
    fig.tight_layout()
    out_png = Path(out_png)
    fig.savefig(out_png, dpi=_DPI)
    plt.close(fig)
    return out_png


def save_sensing_scatter(
    truth_points: list[tuple[float, float]],
    estimate_points: list[tuple[float, float]],
    out_png: str | Path,
    title: str = "delay-Doppler estimates",
) -> Path:
    fig, ax = plt.subplots(figsize=(5.2, 4.2))
    if truth_points:
        td, ta = zip(*truth_points)
        ax.scatter(td, ta, marker="x", s=60, color="k", label="truth")
    if estimate_points:
        ed, ea = zip(*estimate_points)
        ax.scatter(ed, ea, marker="o", s=24, alpha=0.6, label="estimate")
    ax.set_xlabel("delay (samples)")
    ax.set_ylabel("Doppler (cycles/frame)")
    ax.set_title(title)
    ax.grid(True, alpha=0.4)
    ax.legend()
    fig.tight_layout()
    out_png = Path(out_png)
    fig.savefig(out_png, dpi=_DPI)
    plt.close(fig)
    return out_png
