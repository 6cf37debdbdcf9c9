"""Spectral and beam-pattern analytics: Welch PSD, spectrogram, lobe
metrics, and grating-lobe onset extraction from simulated maps."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.fft import next_fast_len
from scipy.signal import get_window, welch

from .fieldsim import FieldGrid
from .waveform import Waveform

__all__ = [
    "LobeReport",
    "welch_psd",
    "spectrogram",
    "lobe_metrics",
    "grating_onset_from_map",
    "band_power_pattern",
    "sweep_frequency_map",
    "lobe_report_to_dict",
]

# Two local maxima are distinct lobes only when the pattern dips at least
# this far below the smaller of the two between them.
_LOBE_DIP_DB = 3.0

_MAG_FLOOR = 1e-15


@dataclass(frozen=True)
class LobeReport:
    """Beam-pattern summary for one frequency slice (levels in dB re main)."""

    main_direction_deg: float
    main_level_db: float
    beamwidth_3db_deg: float | None
    sidelobe_level_db: float | None
    lobes: tuple[tuple[float, float], ...]


def welch_psd(
    waveform: Waveform,
    segment_len: int = 1024,
    overlap: float = 0.5,
    window: str | tuple = "hann",
) -> tuple[np.ndarray, np.ndarray]:
    """One-sided, window-power-corrected averaged periodogram.

    Returns (freqs [Hz], psd [1/Hz]); the integral of the PSD over
    frequency recovers the mean-square signal power (detrending is off so
    Parseval holds).
    """
    if segment_len > len(waveform):
        raise ValueError("segment_len must not exceed the signal length")
    if not (0 <= overlap < 1):
        raise ValueError("overlap must lie in [0, 1)")
    freqs, psd = welch(
        waveform.samples,
        fs=waveform.sample_rate,
        window=window,
        nperseg=segment_len,
        noverlap=int(round(overlap * segment_len)),
        detrend=False,
        scaling="density",
    )
    return freqs, psd


def spectrogram(
    waveform: Waveform,
    frame_len: int = 256,
    hop: int = 64,
    window: str | tuple = "hann",
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Short-time Fourier magnitudes in dB.

    Frames lie fully inside the signal (no edge padding), hop samples
    apart; frame times refer to frame centers. Returns
    (freqs [Hz], times [s], mag_db with shape (n_freqs, n_frames)).
    """
    n = len(waveform)
    if frame_len > n:
        raise ValueError("frame_len must not exceed the signal length")
    if hop < 1 or int(hop) != hop:
        raise ValueError("hop must be a positive integer")
    win = get_window(window, frame_len, fftbins=True)
    frames = sliding_window_view(waveform.samples, frame_len)[:: int(hop)]
    spec = np.fft.rfft(frames * win, axis=1)
    mag_db = 20.0 * np.log10(np.maximum(np.abs(spec.T), _MAG_FLOOR))
    freqs = np.fft.rfftfreq(frame_len, 1.0 / waveform.sample_rate)
    starts = np.arange(frames.shape[0]) * int(hop)
    times = (starts + frame_len / 2.0) / waveform.sample_rate
    return freqs, times, mag_db


def _local_peaks(y: np.ndarray) -> list[int]:
    """Local maxima indices; boundary samples count as peaks."""
    padded = np.concatenate(([-np.inf], y, [-np.inf]))
    rising = padded[1:-1] > padded[:-2]
    not_falling = padded[1:-1] >= padded[2:]
    return list(np.flatnonzero(rising & not_falling))


def _distinct_lobes(y: np.ndarray) -> tuple[int, list[tuple[int, float]]]:
    """Main peak index and distinct secondary lobes per the dip rule."""
    main = int(np.argmax(y))
    lobes = []
    for p in _local_peaks(y):
        if p == main:
            continue
        lo, hi = sorted((p, main))
        if y[lo : hi + 1].min() <= y[p] - _LOBE_DIP_DB:
            lobes.append((p, float(y[p])))
    return main, lobes


def _crossing(x0: float, x1: float, y0: float, y1: float, level: float) -> float:
    return x0 + (level - y0) * (x1 - x0) / (y1 - y0)


def _beamwidth(pattern: np.ndarray, angles: np.ndarray, main: int) -> float | None:
    level = pattern[main] - 3.0
    left = right = None
    for i in range(main, 0, -1):
        if pattern[i - 1] <= level:
            left = _crossing(angles[i], angles[i - 1], pattern[i], pattern[i - 1], level)
            break
    for i in range(main, len(pattern) - 1):
        if pattern[i + 1] <= level:
            right = _crossing(angles[i], angles[i + 1], pattern[i], pattern[i + 1], level)
            break
    if left is None or right is None:
        return None
    return float(right - left)


def lobe_metrics(pattern_db: np.ndarray, angles_deg: np.ndarray) -> LobeReport:
    """Main lobe, -3 dB beamwidth, and side/grating lobes of a pattern.

    The pattern must be normalized (max = 0 dB) and sampled on at least
    three angles. Secondary maxima count as lobes only when separated
    from the main lobe by a dip of at least 3 dB; the beamwidth is
    linearly interpolated between samples.
    """
    pattern = np.asarray(pattern_db, dtype=float)
    angles = np.asarray(angles_deg, dtype=float)
    if pattern.ndim != 1 or pattern.shape != angles.shape:
        raise ValueError("pattern and angle axis must be 1-D with equal length")
    if pattern.size < 3:
        raise ValueError("need at least three pattern samples")
    if abs(pattern.max()) > 1e-6:
        raise ValueError("pattern must be normalized to a 0 dB maximum")
    if np.ptp(pattern) == 0.0:
        raise ValueError("all-equal pattern has no lobes")

    main, lobes = _distinct_lobes(pattern)
    lobes_deg = tuple(
        (float(angles[i]), level) for i, level in sorted(lobes, key=lambda t: -t[1])
    )
    return LobeReport(
        main_direction_deg=float(angles[main]),
        main_level_db=float(pattern[main]),
        beamwidth_3db_deg=_beamwidth(pattern, angles, main),
        sidelobe_level_db=lobes_deg[0][1] if lobes_deg else None,
        lobes=lobes_deg,
    )


def grating_onset_from_map(grid: FieldGrid, threshold_db: float = -6.0) -> float | None:
    """Lowest map frequency carrying a distinct non-main lobe above threshold.

    Each frequency row is assessed relative to its own maximum, so the
    result does not depend on the grid normalization mode. Returns None
    when no row qualifies. The angular grid must resolve the main lobe
    (step below the beamwidth at the highest frequency); on an
    undersampled grid the row maximum can miss the main lobe and the
    relative levels become meaningless.
    """
    if threshold_db >= 0:
        raise ValueError("threshold_db must be negative")
    order = np.argsort(grid.freqs_hz)
    for i in order:
        row = grid.energy_db[i]
        rel = row - row.max()
        _, lobes = _distinct_lobes(rel)
        if any(level > threshold_db for _, level in lobes):
            return float(grid.freqs_hz[i])
    return None


def band_power_pattern(
    records: list[tuple[float, Waveform]],
    f_lo: float,
    f_hi: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Received band energy per sweep angle, normalized to a 0 dB peak.

    Uses the energy spectrum of each full record (zero padding carries no
    energy, so differing propagation pads across angles do not bias the
    result). Returns (angles_deg, power_db).
    """
    if not records:
        raise ValueError("no sweep records")
    if not (0 <= f_lo < f_hi):
        raise ValueError("need 0 <= f_lo < f_hi")
    fs = records[0][1].sample_rate
    nfft = next_fast_len(max(len(w) for _, w in records))
    freqs = np.fft.rfftfreq(nfft, 1.0 / fs)
    band = (freqs >= f_lo) & (freqs <= f_hi)
    if not band.any():
        raise ValueError("band selects no FFT bins")
    angles = np.array([a for a, _ in records], dtype=float)
    power = np.array(
        [np.sum(np.abs(np.fft.rfft(w.samples, nfft)[band]) ** 2) for _, w in records]
    )
    db = 10.0 * np.log10(np.maximum(power, _MAG_FLOOR**2))
    return angles, db - db.max()


def sweep_frequency_map(
    records: list[tuple[float, Waveform]],
    f_lo: float,
    f_hi: float,
    segment_len: int = 1024,
    overlap: float = 0.5,
    window: str | tuple = "hann",
    normalization: str = "global",
) -> FieldGrid:
    """Frequency-angle energy map estimated from sweep recordings.

    Welch PSDs of the per-angle records, restricted to [f_lo, f_hi], in dB
    with the selected normalization. This is the measured counterpart of
    :func:`airbeam.fieldsim.frequency_angle_map`.
    """
    if not records:
        raise ValueError("no sweep records")
    if normalization not in ("global", "per-row"):
        raise ValueError("normalization must be 'global' or 'per-row'")
    angles = np.array([a for a, _ in records], dtype=float)
    columns = []
    band = None
    freqs_sel = None
    for _, wave in records:
        freqs, psd = welch_psd(wave, segment_len, overlap, window)
        if band is None:
            band = (freqs >= f_lo) & (freqs <= f_hi)
            if not band.any():
                raise ValueError("band selects no PSD bins")
            freqs_sel = freqs[band]
        columns.append(psd[band])
    energy = np.column_stack(columns)
    db = 10.0 * np.log10(np.maximum(energy, _MAG_FLOOR**2))
    if normalization == "global":
        db = db - db.max()
    else:
        db = db - db.max(axis=1, keepdims=True)
    return FieldGrid(angles, freqs_sel, db, normalization)


def lobe_report_to_dict(report: LobeReport) -> dict:
    """JSON-ready form of a lobe report."""
    return {
        "main_direction_deg": report.main_direction_deg,
        "main_level_db": report.main_level_db,
        "beamwidth_3db_deg": report.beamwidth_3db_deg,
        "sidelobe_level_db": report.sidelobe_level_db,
        "lobes": [{"angle_deg": a, "level_db": l} for a, l in report.lobes],
    }


def _write_text(dest, text: str) -> None:
    if hasattr(dest, "write"):
        dest.write(text)
    else:
        with open(dest, "w", encoding="utf-8") as fh:
            fh.write(text)


def psd_to_csv(freqs: np.ndarray, psd: np.ndarray, dest, comment: str | None = None) -> None:
    """Write ``freq_hz,psd`` rows."""
    lines = [f"# {comment}"] if comment else []
    lines.append("freq_hz,psd")
    lines.extend(f"{float(f)!r},{float(p)!r}" for f, p in zip(freqs, psd))
    _write_text(dest, "\n".join(lines) + "\n")


def spectrogram_to_csv(
    freqs: np.ndarray,
    times: np.ndarray,
    mag_db: np.ndarray,
    dest,
    comment: str | None = None,
) -> None:
    """Write the magnitude matrix as CSV: frequency rows, frame-time columns."""
    lines = [f"# {comment}"] if comment else []
    lines.append("freq_hz," + ",".join(repr(float(t)) for t in times))
    for f, row in zip(freqs, mag_db):
        lines.append(repr(float(f)) + "," + ",".join(repr(float(v)) for v in row))
    _write_text(dest, "\n".join(lines) + "\n")
