"""Radiated-field prediction: array factors, frequency-angle energy maps,
and a virtual pan-tilt measurement with a point receiver.

Elements are modeled as omnidirectional point sources with flat frequency
response; propagation is free-field with optional 1/r spreading and no
atmospheric absorption. Observation directions for the maps lie in the
horizontal plane (elevation 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .emission import EmissionMatrix
from .geometry import ArrayGeometry
from .steering import (
    DelayProfile,
    SampleDelayProfile,
    SteerAngles,
    quantize_delays,
    steering_vector,
    transmit_delays,
)
from .waveform import DAC_SILENCE_CODE, Waveform, dequantize_dac

__all__ = [
    "FieldGrid",
    "ReceiverSpec",
    "narrowband_array_factor",
    "frequency_angle_map",
    "synthesize_received_signal",
    "pan_tilt_sweep",
    "field_grid_to_csv",
    "field_grid_from_csv",
    "field_grid_to_pgm",
    "field_grid_sidecar",
]

# Energy floor before dB conversion; keeps exact pattern nulls finite.
_ENERGY_FLOOR = 1e-30

_DB_FLOOR_DEFAULT = -40.0


@dataclass(frozen=True, eq=False)
class FieldGrid:
    """Radiated energy in dB over a frequency x angle grid, peak at 0 dB."""

    angles_deg: np.ndarray
    freqs_hz: np.ndarray
    energy_db: np.ndarray
    normalization: str = "global"

    def __post_init__(self) -> None:
        angles = np.asarray(self.angles_deg, dtype=float)
        freqs = np.asarray(self.freqs_hz, dtype=float)
        energy = np.asarray(self.energy_db, dtype=float)
        if angles.ndim != 1 or freqs.ndim != 1:
            raise ValueError("axes must be 1-D")
        if energy.shape != (freqs.size, angles.size):
            raise ValueError("energy_db must have shape (n_freqs, n_angles)")
        if energy.size == 0:
            raise ValueError("grid must not be empty")
        if not np.all(np.isfinite(energy)):
            raise ValueError("energy_db must be finite")
        if not (-1e-6 < energy.max() <= 1e-9):
            raise ValueError("energy_db must be normalized to a 0 dB maximum")
        for arr in (angles, freqs, energy):
            arr.setflags(write=False)
        object.__setattr__(self, "angles_deg", angles)
        object.__setattr__(self, "freqs_hz", freqs)
        object.__setattr__(self, "energy_db", energy)


@dataclass(frozen=True)
class ReceiverSpec:
    """Point receiver at ``distance`` [m] along ``direction`` from the array center."""

    distance: float
    direction: SteerAngles

    def __post_init__(self) -> None:
        if self.distance <= 0:
            raise ValueError("receiver distance must be positive")

    def position(self) -> np.ndarray:
        return self.distance * steering_vector(self.direction)


def _delay_vector(delays: DelayProfile | SampleDelayProfile) -> np.ndarray:
    if isinstance(delays, SampleDelayProfile):
        # Hardware applies the integer shifts; the removed common offset
        # only adds a global phase and cannot change |AF|.
        return delays.k / delays.sample_rate
    return delays.tau


def narrowband_array_factor(
    geometry: ArrayGeometry,
    delays: DelayProfile | SampleDelayProfile,
    freq: float,
    observation: SteerAngles,
    c: float = 343.0,
    weights: np.ndarray | None = None,
) -> complex:
    """Complex array factor at one frequency and observation direction.

    AF = (1/M) * sum_m w_m * exp(j 2 pi f (p_m . u_obs / c + delay_m)),
    so |AF| <= 1 with equality when all element phasors align.
    """
    if freq <= 0:
        raise ValueError("frequency must be positive")
    if c <= 0:
        raise ValueError("speed of sound must be positive")
    p = geometry.positions
    d = _delay_vector(delays)
    if d.size != geometry.n_elements:
        raise ValueError("delay profile length must match the element count")
    if weights is None:
        weights = np.ones(geometry.n_elements)
    u = steering_vector(observation)
    phase = 2.0 * math.pi * freq * ((p @ u) / c + d)
    return complex(np.mean(weights * np.exp(1j * phase)))


def frequency_angle_map(
    geometry: ArrayGeometry,
    angles: SteerAngles,
    freqs_hz: np.ndarray,
    angles_deg: np.ndarray,
    c: float = 343.0,
    mode: str = "continuous",
    sample_rate: float | None = None,
    normalization: str = "global",
    weights: np.ndarray | None = None,
) -> FieldGrid:
    """Radiated energy |AF|^2 in dB over frequency and horizontal angle.

    ``mode`` selects the steering delays: "continuous" uses the exact
    profile, "quantized" uses the integer sample shifts at ``sample_rate``
    and thereby exposes the quantization artifacts of the DAC back end.
    ``normalization`` is "global" (single 0 dB peak) or "per-row" (each
    frequency row has its own 0 dB peak).
    """
    freqs = np.asarray(freqs_hz, dtype=float)
    obs = np.asarray(angles_deg, dtype=float)
    if freqs.size == 0 or obs.size == 0:
        raise ValueError("frequency and angle grids must be non-empty")
    if np.any(freqs <= 0):
        raise ValueError("frequencies must be positive")
    if normalization not in ("global", "per-row"):
        raise ValueError("normalization must be 'global' or 'per-row'")

    profile = transmit_delays(geometry, angles, c)
    if mode == "continuous":
        d = profile.tau
    elif mode == "quantized":
        if sample_rate is None:
            raise ValueError("quantized mode requires a sample_rate")
        d = _delay_vector(quantize_delays(profile, sample_rate))
    else:
        raise ValueError("mode must be 'continuous' or 'quantized'")

    if weights is None:
        weights = np.ones(geometry.n_elements)
    p = geometry.positions
    rad = np.deg2rad(obs)
    # Geometric advance toward each observation direction in the horizontal
    # plane; summation order over elements is fixed for determinism.
    t_geo = (np.outer(np.cos(rad), p[:, 0]) + np.outer(np.sin(rad), p[:, 1])) / c
    total = t_geo + d[None, :]  # (A, M)
    af = np.tensordot(
        np.exp(2j * math.pi * freqs[:, None, None] * total[None, :, :]),
        weights,
        axes=([2], [0]),
    ) / geometry.n_elements  # (F, A)
    energy = np.abs(af) ** 2
    db = 10.0 * np.log10(np.maximum(energy, _ENERGY_FLOOR))
    if normalization == "global":
        db = db - db.max()
    else:
        db = db - db.max(axis=1, keepdims=True)
    return FieldGrid(obs, freqs, db, normalization)


def synthesize_received_signal(
    geometry: ArrayGeometry,
    matrix: EmissionMatrix,
    receiver: ReceiverSpec,
    c: float = 343.0,
    include_spreading: bool = True,
    attenuation_db_per_m: float = 0.0,
) -> Waveform:
    """Free-field signal at a point receiver from a driven DAC matrix.

    Each row is dequantized (mid-rail removed: the silence code is
    acoustic zero for an AC-coupled speaker), delayed by the exact
    element-receiver distance over c via linear interpolation, scaled by
    1/r when spreading is enabled, and summed. The output keeps the
    matrix sample rate and includes the propagation onset delay.
    ``attenuation_db_per_m`` adds a simple frequency-flat absorption term
    on top of spherical spreading (0 by default).
    """
    if c <= 0:
        raise ValueError("speed of sound must be positive")
    if attenuation_db_per_m < 0:
        raise ValueError("attenuation must be non-negative")
    if matrix.n_elements != geometry.n_elements:
        raise ValueError("matrix row count must match the element count")
    rx = receiver.position()
    dists = np.linalg.norm(rx[None, :] - geometry.positions, axis=1)
    # Sub-picometer separation is a degenerate 1/r model, not a measurement.
    if np.any(dists < 1e-12):
        raise ValueError("receiver coincides with an element")
    fs = matrix.sample_rate
    delay_samples = dists / c * fs
    n_in = matrix.n_samples
    n_out = n_in + int(np.ceil(delay_samples.max()))
    out = np.zeros(n_out)
    grid = np.arange(n_in, dtype=float)
    target = np.arange(n_out, dtype=float)
    midrail = dequantize_dac(np.array([DAC_SILENCE_CODE]))[0]
    for m in range(matrix.n_elements):
        s = dequantize_dac(matrix.codes[m]) - midrail
        shifted = np.interp(target - delay_samples[m], grid, s, left=0.0, right=0.0)
        gain = 1.0 / dists[m] if include_spreading else 1.0
        if attenuation_db_per_m:
            gain *= 10.0 ** (-attenuation_db_per_m * dists[m] / 20.0)
        out += gain * shifted
    return Waveform(out, fs)


def pan_tilt_sweep(
    geometry: ArrayGeometry,
    matrix: EmissionMatrix,
    distance: float,
    pan_angles_deg: np.ndarray,
    c: float = 343.0,
    include_spreading: bool = True,
    attenuation_db_per_m: float = 0.0,
) -> list[tuple[float, Waveform]]:
    """Virtual pan-tilt measurement: received signal per pan angle.

    Panning the array by +a in front of a fixed microphone is equivalent
    to moving the receiver to azimuth -a in the array frame, so the
    returned patterns share the angle convention of the steering modules
    (a steered beam peaks at the steering angle).
    """
    pan = np.asarray(pan_angles_deg, dtype=float)
    if pan.size == 0:
        raise ValueError("pan angle range must be non-empty")
    out = []
    for a in pan:
        receiver = ReceiverSpec(distance, SteerAngles(0.0, -math.radians(a)))
        out.append(
            (
                float(a),
                synthesize_received_signal(
                    geometry, matrix, receiver, c, include_spreading, attenuation_db_per_m
                ),
            )
        )
    return out


def field_grid_to_csv(grid: FieldGrid, dest, comment: str | None = None) -> None:
    """Write the grid as CSV: header row of angles, one row per frequency."""
    lines = []
    if comment:
        lines.append(f"# {comment}")
    lines.append("freq_hz," + ",".join(repr(float(a)) for a in grid.angles_deg))
    for f, row in zip(grid.freqs_hz, grid.energy_db):
        lines.append(repr(float(f)) + "," + ",".join(repr(float(v)) for v in row))
    text = "\n".join(lines) + "\n"
    if hasattr(dest, "write"):
        dest.write(text)
    else:
        with open(dest, "w", encoding="utf-8") as fh:
            fh.write(text)


def field_grid_from_csv(source, normalization: str = "global") -> FieldGrid:
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    angles = None
    freqs, rows = [], []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split(",")
        if fields[0] == "freq_hz":
            angles = [float(v) for v in fields[1:]]
            continue
        freqs.append(float(fields[0]))
        rows.append([float(v) for v in fields[1:]])
    if angles is None or not rows:
        raise ValueError("field grid CSV is missing its header or data")
    return FieldGrid(np.array(angles), np.array(freqs), np.array(rows), normalization)


def _grid_to_gray(grid: FieldGrid, floor_db: float) -> np.ndarray:
    clipped = np.clip(grid.energy_db, floor_db, 0.0)
    gray = np.round((clipped - floor_db) / (-floor_db) * 255.0).astype(np.uint8)
    # Image rows run top to bottom; put the highest frequency on top.
    return gray[::-1, :]


def field_grid_to_pgm(
    grid: FieldGrid, dest, floor_db: float = _DB_FLOOR_DEFAULT, comment: str | None = None
) -> None:
    """Write an 8-bit binary PGM; dB values are clipped at ``floor_db``."""
    if floor_db >= 0:
        raise ValueError("floor_db must be negative")
    gray = _grid_to_gray(grid, floor_db)
    header = "P5\n"
    if comment:
        header += f"# {comment}\n"
    header += f"{gray.shape[1]} {gray.shape[0]}\n255\n"
    blob = header.encode("ascii") + gray.tobytes()
    if hasattr(dest, "write"):
        dest.write(blob)
    else:
        with open(dest, "wb") as fh:
            fh.write(blob)


def field_grid_sidecar(grid: FieldGrid, floor_db: float = _DB_FLOOR_DEFAULT) -> dict:
    """JSON-ready description of the grid axes and PGM rendering."""
    return {
        "angles_deg": [float(a) for a in grid.angles_deg],
        "freqs_hz": [float(f) for f in grid.freqs_hz],
        "normalization": grid.normalization,
        "db_floor": floor_db,
        "pgm": {
            "maxval": 255,
            "rows": "frequency, highest on top",
            "columns": "angle, ascending left to right",
            "gray_mapping": "round((clip(db, floor, 0) - floor) / -floor * 255)",
        },
    }
