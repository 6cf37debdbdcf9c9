"""Emission waveform synthesis and 12-bit DAC code conversion.

Generators produce full-scale-normalized samples (|s| <= amplitude <= 1);
the DAC converter maps [-1, 1] onto unsigned 12-bit codes stored in 16-bit
words, mid-scale 2048 representing zero output.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import get_window

__all__ = [
    "DAC_MAX_CODE",
    "DAC_SILENCE_CODE",
    "Waveform",
    "ChirpSpec",
    "DacCodes",
    "log_chirp_phase",
    "log_chirp",
    "sine_burst",
    "multisine",
    "quantize_to_dac",
    "dequantize_dac",
    "waveform_to_csv",
    "waveform_from_csv",
    "waveform_to_raw",
    "waveform_from_raw",
]

DAC_MAX_CODE = 4095
DAC_SILENCE_CODE = 2048

_RAW_FULL_SCALE = 32767  # int16 interchange scaling for the raw export


@dataclass(frozen=True, eq=False)
class Waveform:
    """Uniformly sampled real signal with its sample rate [Hz].

    Generated emission waveforms keep |s| <= 1 (enforced again at the DAC
    boundary); simulated received signals reuse this type and may exceed
    unity since element contributions add coherently.
    """

    samples: np.ndarray
    sample_rate: float

    def __post_init__(self) -> None:
        s = np.asarray(self.samples, dtype=float)
        if s.ndim != 1:
            raise ValueError("samples must be 1-D")
        if not np.all(np.isfinite(s)):
            raise ValueError("samples must be finite")
        if self.sample_rate <= 0:
            raise ValueError("sample rate must be positive")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate


@dataclass(frozen=True)
class ChirpSpec:
    """Logarithmic (exponential) sweep parameters."""

    f_start: float
    f_end: float
    duration: float
    amplitude: float = 1.0
    window: str | tuple = ("tukey", 0.1)

    def __post_init__(self) -> None:
        if self.f_start <= 0 or self.f_end <= 0:
            raise ValueError("chirp frequencies must be positive")
        if self.f_start == self.f_end:
            raise ValueError("log chirp requires f_start != f_end")
        if self.duration <= 0:
            raise ValueError("duration must be positive")
        if not (0 < self.amplitude <= 1):
            raise ValueError("amplitude must be in (0, 1]")


@dataclass(frozen=True, eq=False)
class DacCodes:
    """Unsigned 12-bit DAC codes stored zero-padded in 16-bit words."""

    codes: np.ndarray

    def __post_init__(self) -> None:
        c = np.asarray(self.codes)
        if c.ndim != 1:
            raise ValueError("codes must be 1-D")
        if c.size and (c.min() < 0 or c.max() > DAC_MAX_CODE):
            raise ValueError("codes must fit in 12 bits (0..4095)")
        c = c.astype(np.uint16)
        c.setflags(write=False)
        object.__setattr__(self, "codes", c)

    def __len__(self) -> int:
        return self.codes.size


def _window(window: str | tuple | None, n: int) -> np.ndarray:
    if window is None:
        return np.ones(n)
    return get_window(window, n, fftbins=False)


def log_chirp_phase(t: np.ndarray, f_start: float, f_end: float, duration: float) -> np.ndarray:
    """Phase [rad] of the exponential sweep at times ``t``.

    phi(t) = 2*pi * f_start * (T / ln r) * (r**(t/T) - 1) with
    r = f_end / f_start, so the instantaneous frequency phi'(t) / (2*pi)
    equals f_start * r**(t/T).
    """
    r = f_end / f_start
    t = np.asarray(t, dtype=float)
    return 2.0 * math.pi * f_start * (duration / math.log(r)) * (r ** (t / duration) - 1.0)


def log_chirp(spec: ChirpSpec, sample_rate: float) -> Waveform:
    """Synthesize a windowed logarithmic chirp at the given rate."""
    if sample_rate <= 2.0 * max(spec.f_start, spec.f_end):
        raise ValueError("sample rate must exceed twice the highest chirp frequency")
    n = int(round(spec.duration * sample_rate))
    if n < 2:
        raise ValueError("chirp too short for the given sample rate")
    t = np.arange(n) / sample_rate
    phase = log_chirp_phase(t, spec.f_start, spec.f_end, spec.duration)
    samples = spec.amplitude * _window(spec.window, n) * np.sin(phase)
    return Waveform(samples, float(sample_rate))


def sine_burst(
    freq: float,
    cycles: int,
    sample_rate: float,
    amplitude: float = 1.0,
    window: str | tuple | None = "boxcar",
) -> Waveform:
    """Sinusoidal burst of a whole number of cycles."""
    if freq <= 0:
        raise ValueError("frequency must be positive")
    if int(cycles) != cycles or cycles < 1:
        raise ValueError("cycles must be a positive integer")
    if sample_rate <= 2.0 * freq:
        raise ValueError("sample rate must exceed twice the burst frequency")
    if not (0 < amplitude <= 1):
        raise ValueError("amplitude must be in (0, 1]")
    n = int(round(cycles * sample_rate / freq))
    t = np.arange(n) / sample_rate
    samples = amplitude * _window(window, n) * np.sin(2.0 * math.pi * freq * t)
    return Waveform(samples, float(sample_rate))


def multisine(
    freqs,
    amps,
    phases,
    duration: float,
    sample_rate: float,
    amplitude: float = 1.0,
) -> Waveform:
    """Sum of sinusoids, peak-normalized to the requested amplitude.

    ``amps`` and ``phases`` may be None for unit amplitudes / zero phases.
    """
    freqs = np.asarray(freqs, dtype=float)
    if freqs.size == 0:
        raise ValueError("need at least one tone")
    if np.any(freqs <= 0):
        raise ValueError("tone frequencies must be positive")
    if sample_rate <= 2.0 * freqs.max():
        raise ValueError("sample rate must exceed twice the highest tone")
    if duration <= 0:
        raise ValueError("duration must be positive")
    if not (0 < amplitude <= 1):
        raise ValueError("amplitude must be in (0, 1]")
    amps = np.ones_like(freqs) if amps is None else np.asarray(amps, dtype=float)
    phases = np.zeros_like(freqs) if phases is None else np.asarray(phases, dtype=float)
    if amps.shape != freqs.shape or phases.shape != freqs.shape:
        raise ValueError("freqs, amps and phases must have equal length")
    n = int(round(duration * sample_rate))
    t = np.arange(n) / sample_rate
    x = np.zeros(n)
    for f, a, p in zip(freqs, amps, phases):
        x += a * np.sin(2.0 * math.pi * f * t + p)
    peak = np.max(np.abs(x))
    if peak == 0.0:
        raise ValueError("multisine is identically zero; cannot peak-normalize")
    return Waveform(x * (amplitude / peak), float(sample_rate))


def quantize_to_dac(waveform: Waveform | np.ndarray) -> DacCodes:
    """Map samples in [-1, 1] onto 12-bit codes: round((s+1)/2 * 4095).

    s = 0 maps to mid-code 2048 (asymmetric by half an LSB); the mapping
    is clamp-free over the full input range.
    """
    s = waveform.samples if isinstance(waveform, Waveform) else np.asarray(waveform, dtype=float)
    if s.size and (np.max(s) > 1.0 or np.min(s) < -1.0):
        raise ValueError("samples must lie within [-1, 1] for DAC conversion")
    codes = np.clip(np.round((s + 1.0) / 2.0 * DAC_MAX_CODE), 0, DAC_MAX_CODE)
    return DacCodes(codes.astype(np.uint16))


def dequantize_dac(codes: DacCodes | np.ndarray) -> np.ndarray:
    """Inverse DAC mapping: code / 4095 * 2 - 1. Error <= 1/4095 (half an LSB)."""
    c = codes.codes if isinstance(codes, DacCodes) else np.asarray(codes)
    return c.astype(float) / DAC_MAX_CODE * 2.0 - 1.0


def waveform_to_csv(waveform: Waveform, dest, comment: str | None = None) -> None:
    """Write ``n,s`` rows (sample index, amplitude)."""
    lines = []
    if comment:
        lines.append(f"# {comment}")
    lines.append("n,s")
    lines.extend(f"{n},{float(s)!r}" for n, s in enumerate(waveform.samples))
    text = "\n".join(lines) + "\n"
    if hasattr(dest, "write"):
        dest.write(text)
    else:
        with open(dest, "w", encoding="utf-8") as fh:
            fh.write(text)


def waveform_from_csv(source, sample_rate: float) -> Waveform:
    """Read an ``n,s`` CSV; the rate comes from the caller (CSV carries none)."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    samples = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#") or line == "n,s":
            continue
        fields = line.split(",")
        if len(fields) != 2:
            raise ValueError(f"malformed waveform CSV row: {line!r}")
        samples.append(float(fields[1]))
    if not samples:
        raise ValueError("waveform CSV contains no samples")
    return Waveform(np.array(samples), sample_rate)


def waveform_to_raw(waveform: Waveform, path) -> None:
    """Write 16-bit little-endian PCM plus a JSON sidecar carrying the rate.

    Signals louder than full scale (coherent receiver sums) are stored
    normalized, with the recovery factor kept in the sidecar.
    """
    peak = float(np.max(np.abs(waveform.samples))) if len(waveform) else 0.0
    amplitude_scale = max(1.0, peak)
    scaled = np.round(waveform.samples / amplitude_scale * _RAW_FULL_SCALE)
    scaled.astype("<i2").tofile(path)
    sidecar = {
        "encoding": "int16_le",
        "full_scale": _RAW_FULL_SCALE,
        "amplitude_scale": amplitude_scale,
        "sample_rate_hz": waveform.sample_rate,
        "num_samples": int(waveform.samples.size),
    }
    with open(f"{path}.json", "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")


def waveform_from_raw(path) -> Waveform:
    """Read a raw int16 export and its sidecar descriptor."""
    with open(f"{path}.json", "r", encoding="utf-8") as fh:
        sidecar = json.load(fh)
    if sidecar.get("encoding") != "int16_le":
        raise ValueError(f"unsupported raw encoding: {sidecar.get('encoding')!r}")
    data = np.fromfile(path, dtype="<i2")
    if data.size != sidecar["num_samples"]:
        raise ValueError("raw payload length does not match sidecar")
    scale = float(sidecar.get("amplitude_scale", 1.0)) / sidecar["full_scale"]
    return Waveform(data.astype(float) * scale, float(sidecar["sample_rate_hz"]))
