"""File-based matplotlib renderings of grids, patterns, and signal reports."""

from __future__ import annotations

import numpy as np

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .analysis import spectrogram, welch_psd
from .fieldsim import FieldGrid
from .geometry import ArrayGeometry
from .waveform import Waveform

__all__ = [
    "save_field_grid_png",
    "save_band_power_png",
    "save_geometry_png",
    "save_signal_report_png",
]


def save_field_grid_png(
    grid: FieldGrid,
    path,
    floor_db: float = -40.0,
    title: str | None = None,
    cmap: str = "inferno",
    metadata: dict | None = None,
) -> None:
    """Render a frequency-angle energy map as a PNG heatmap."""
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    mesh = ax.pcolormesh(
        grid.angles_deg,
        grid.freqs_hz / 1e3,
        np.clip(grid.energy_db, floor_db, 0.0),
        cmap=cmap,
        vmin=floor_db,
        vmax=0.0,
        shading="nearest",
    )
    fig.colorbar(mesh, ax=ax, label="energy (dB)")
    ax.set_xlabel("azimuth (deg)")
    ax.set_ylabel("frequency (kHz)")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150, format="png", metadata=metadata)
    plt.close(fig)


def save_band_power_png(
    angles_deg: np.ndarray,
    power_db: np.ndarray,
    path,
    steer_deg: float | None = None,
    title: str | None = None,
    metadata: dict | None = None,
) -> None:
    """Render a band-power-vs-angle pattern as a PNG line plot."""
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    ax.plot(angles_deg, power_db, lw=1.2)
    if steer_deg is not None:
        ax.axvline(steer_deg, color="tab:red", ls="--", lw=0.9, label=f"steer {steer_deg:g} deg")
        ax.legend(loc="lower center", fontsize=8)
    ax.set_xlabel("pan angle (deg)")
    ax.set_ylabel("band power (dB)")
    ax.grid(alpha=0.3)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150, format="png", metadata=metadata)
    plt.close(fig)


def save_geometry_png(
    geometry: ArrayGeometry, path, title: str | None = None, metadata: dict | None = None
) -> None:
    """Render the element layout (Y-Z plane, millimeters)."""
    fig, ax = plt.subplots(figsize=(6.0, 2.6))
    y = geometry.positions[:, 1] * 1e3
    z = geometry.positions[:, 2] * 1e3
    ax.scatter(y, z, s=24, marker="o", edgecolor="k", linewidth=0.5)
    ax.set_xlabel("y (mm)")
    ax.set_ylabel("z (mm)")
    ax.set_aspect("equal")
    ax.grid(alpha=0.3)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150, format="png", metadata=metadata)
    plt.close(fig)


def save_signal_report_png(
    waveform: Waveform,
    path,
    title: str | None = None,
    frame_len: int = 256,
    hop: int = 64,
    metadata: dict | None = None,
) -> None:
    """Three-panel signal report: time trace, spectrogram, Welch PSD."""
    fig, axes = plt.subplots(3, 1, figsize=(6.4, 7.2))
    t = np.arange(len(waveform)) / waveform.sample_rate
    axes[0].plot(t * 1e3, waveform.samples, lw=0.4)
    axes[0].set_xlabel("time (ms)")
    axes[0].set_ylabel("amplitude")

    freqs, times, mag_db = spectrogram(waveform, frame_len=frame_len, hop=hop)
    ref = mag_db.max()
    mesh = axes[1].pcolormesh(
        times * 1e3,
        freqs / 1e3,
        np.clip(mag_db - ref, -60.0, 0.0),
        cmap="inferno",
        shading="nearest",
    )
    fig.colorbar(mesh, ax=axes[1], label="dB")
    axes[1].set_xlabel("time (ms)")
    axes[1].set_ylabel("frequency (kHz)")

    seg = min(1024, len(waveform))
    pf, psd = welch_psd(waveform, segment_len=seg)
    axes[2].plot(pf / 1e3, 10.0 * np.log10(np.maximum(psd, 1e-30)), lw=0.8)
    axes[2].set_xlabel("frequency (kHz)")
    axes[2].set_ylabel("PSD (dB/Hz)")
    axes[2].grid(alpha=0.3)

    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150, format="png", metadata=metadata)
    plt.close(fig)
