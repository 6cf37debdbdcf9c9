"""Steering vectors, per-element transmit delays, and grating-lobe limits.

Angles: elevation theta is measured from the X-Y plane, azimuth phi from
the X axis (broadside is theta = phi = 0). Radians everywhere in this
module; the CLI converts from degrees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import ArrayGeometry

__all__ = [
    "SPEED_OF_SOUND",
    "SteerAngles",
    "DelayProfile",
    "SampleDelayProfile",
    "steering_vector",
    "transmit_delays",
    "horizontal_plane_delays",
    "quantize_delays",
    "nyquist_steering_limit",
    "visible_grating_onset",
    "delay_profile_to_csv",
    "delay_profile_from_csv",
    "sample_delays_to_csv",
    "sample_delays_from_csv",
]

SPEED_OF_SOUND = 343.0
"Speed of sound in dry air at 20 degC [m/s]; every operation takes c as a parameter."


@dataclass(frozen=True)
class SteerAngles:
    """Steering direction: elevation theta and azimuth phi, radians."""

    theta: float
    phi: float

    def __post_init__(self) -> None:
        if not (-math.pi / 2 <= self.theta <= math.pi / 2):
            raise ValueError("theta must be in [-pi/2, pi/2]")
        if not (-math.pi <= self.phi <= math.pi):
            raise ValueError("phi must be in [-pi, pi]")

    @classmethod
    def from_degrees(cls, theta_deg: float, phi_deg: float) -> "SteerAngles":
        return cls(math.radians(theta_deg), math.radians(phi_deg))


@dataclass(frozen=True, eq=False)
class DelayProfile:
    """Continuous per-element transmit delays [s], aligned with element order."""

    tau: np.ndarray
    speed_of_sound: float

    def __post_init__(self) -> None:
        tau = np.asarray(self.tau, dtype=float)
        if tau.ndim != 1 or tau.size == 0:
            raise ValueError("tau must be a non-empty 1-D array")
        if not np.all(np.isfinite(tau)):
            raise ValueError("delays must be finite")
        if self.speed_of_sound <= 0:
            raise ValueError("speed of sound must be positive")
        tau.setflags(write=False)
        object.__setattr__(self, "tau", tau)

    @property
    def n_elements(self) -> int:
        return self.tau.size


@dataclass(frozen=True, eq=False)
class SampleDelayProfile:
    """Non-negative integer sample shifts realizing a delay profile.

    ``k[m] = floor((tau[m] - offset) * sample_rate)`` with ``offset`` the
    minimum delay, so the smallest shift is always 0 and every shift is
    realizable as a right-shift of the waveform.
    """

    k: np.ndarray
    offset: float
    sample_rate: float

    def __post_init__(self) -> None:
        k = np.asarray(self.k, dtype=np.int64)
        if k.ndim != 1 or k.size == 0:
            raise ValueError("k must be a non-empty 1-D array")
        if k.min() != 0:
            raise ValueError("smallest sample shift must be 0")
        if self.sample_rate <= 0:
            raise ValueError("sample rate must be positive")
        k.setflags(write=False)
        object.__setattr__(self, "k", k)

    @property
    def n_elements(self) -> int:
        return self.k.size

    @property
    def max_shift(self) -> int:
        return int(self.k.max())


def steering_vector(angles: SteerAngles) -> np.ndarray:
    """Unit direction vector [cos(t)cos(p), cos(t)sin(p), sin(t)]."""
    ct = math.cos(angles.theta)
    return np.array(
        [ct * math.cos(angles.phi), ct * math.sin(angles.phi), math.sin(angles.theta)]
    )


def transmit_delays(
    geometry: ArrayGeometry, angles: SteerAngles, c: float = SPEED_OF_SOUND
) -> DelayProfile:
    """Per-element transmit delays for plane-wave steering.

    tau_m = -(p_m . u(theta, phi)) / c, measured relative to the array
    center. Broadside gives all zeros for an in-plane (x = 0) layout.
    """
    if c <= 0:
        raise ValueError("speed of sound must be positive")
    u = steering_vector(angles)
    p = geometry.positions
    tau = -(p[:, 0] * u[0] + p[:, 1] * u[1] + p[:, 2] * u[2]) / c
    return DelayProfile(tau, float(c))


def horizontal_plane_delays(
    n_elements: int, d_y: float, phi: float, c: float = SPEED_OF_SOUND
) -> DelayProfile:
    """Delays for a uniform line of elements steered in the horizontal plane.

    tau_m = -m * d_y * sin(phi) / c for m = 0 .. n_elements-1. Indexing is
    element-0-referenced, so this differs from the center-referenced
    :func:`transmit_delays` of the same line by a constant delay only; the
    constant is removed by :func:`quantize_delays` normalization.
    """
    if n_elements < 1:
        raise ValueError("need at least one element")
    if d_y <= 0:
        raise ValueError("d_y must be positive")
    if c <= 0:
        raise ValueError("speed of sound must be positive")
    m = np.arange(n_elements, dtype=float)
    tau = -(m * d_y * math.sin(phi)) / c
    return DelayProfile(tau, float(c))


def quantize_delays(profile: DelayProfile, sample_rate: float) -> SampleDelayProfile:
    """Quantize delays to non-negative integer sample shifts.

    The minimum delay is subtracted before flooring; a common additive
    delay does not change the far-field pattern, and the subtraction makes
    every shift realizable in hardware.
    """
    if sample_rate <= 0:
        raise ValueError("sample rate must be positive")
    offset = float(profile.tau.min())
    k = np.floor((profile.tau - offset) * sample_rate).astype(np.int64)
    return SampleDelayProfile(k, offset, float(sample_rate))


def nyquist_steering_limit(d_proj: float, phi: float, c: float = SPEED_OF_SOUND) -> float:
    """Spatial-aliasing frequency limit c / (2 * d_proj * |sin(phi)|) [Hz].

    Below this frequency the inter-element delay sampling across the
    projected aperture is unambiguous for steering angle phi. Returns
    ``math.inf`` when sin(phi) is exactly zero (broadside: no limit).
    """
    if d_proj <= 0:
        raise ValueError("d_proj must be positive")
    if c <= 0:
        raise ValueError("speed of sound must be positive")
    s = abs(math.sin(phi))
    if s == 0.0:
        return math.inf
    return c / (2.0 * d_proj * s)


def visible_grating_onset(d_proj: float, phi: float, c: float = SPEED_OF_SOUND) -> float:
    """Lowest frequency at which a grating lobe enters the visible region [Hz].

    Standard visible-region criterion c / (d_proj * (1 + |sin(phi)|)) for a
    uniform lattice of projected pitch d_proj steered to phi. Coincides
    with :func:`nyquist_steering_limit` at phi = 90 deg.
    """
    if d_proj <= 0:
        raise ValueError("d_proj must be positive")
    if c <= 0:
        raise ValueError("speed of sound must be positive")
    return c / (d_proj * (1.0 + abs(math.sin(phi))))


def _write_rows(dest, header: str, rows, comment: str | None) -> None:
    lines = []
    if comment:
        lines.append(f"# {comment}")
    lines.append(header)
    lines.extend(rows)
    text = "\n".join(lines) + "\n"
    if hasattr(dest, "write"):
        dest.write(text)
    else:
        with open(dest, "w", encoding="utf-8") as fh:
            fh.write(text)


def _read_rows(source, header: str):
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    out = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line == header:
            continue
        out.append(line.split(","))
    if not out:
        raise ValueError("CSV contains no data rows")
    return out


def delay_profile_to_csv(profile: DelayProfile, dest, comment: str | None = None) -> None:
    """Write ``m,tau_s`` rows."""
    rows = [f"{m},{float(t)!r}" for m, t in enumerate(profile.tau)]
    _write_rows(dest, "m,tau_s", rows, comment)


def delay_profile_from_csv(source, c: float = SPEED_OF_SOUND) -> DelayProfile:
    tau = [float(f[1]) for f in _read_rows(source, "m,tau_s")]
    return DelayProfile(np.array(tau), c)


def sample_delays_to_csv(profile: SampleDelayProfile, dest, comment: str | None = None) -> None:
    """Write ``m,k`` rows."""
    rows = [f"{m},{int(k)}" for m, k in enumerate(profile.k)]
    _write_rows(dest, "m,k", rows, comment)


def sample_delays_from_csv(source, offset: float, sample_rate: float) -> SampleDelayProfile:
    k = [int(f[1]) for f in _read_rows(source, "m,k")]
    return SampleDelayProfile(np.array(k, dtype=np.int64), offset, sample_rate)
