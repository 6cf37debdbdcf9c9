"""Per-element DAC code matrix assembly and its binary interchange format.

The emission matrix holds one row of 16-bit words (12-bit payload) per
element; steering is applied as integer right-shifts of the quantized
waveform, padded with the mid-scale silence code.

``.dacmat`` layout (all multi-byte fields little-endian):

    magic   4 bytes  b"CNMA"
    version u16      1
    M       u16      number of rows (elements)
    N       u32      samples per row
    Fs_Hz   u32      DAC update rate in Hz
    codes   M*N u16  row-major payload, each <= 4095
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .geometry import ArrayGeometry
from .steering import SteerAngles, quantize_delays, transmit_delays
from .waveform import DAC_MAX_CODE, DAC_SILENCE_CODE, Waveform, quantize_to_dac

__all__ = [
    "DACMAT_MAGIC",
    "DACMAT_VERSION",
    "EmissionMatrix",
    "DacMatFormatError",
    "assemble_emission_matrix",
    "write_dacmat",
    "read_dacmat",
]

DACMAT_MAGIC = b"CNMA"
DACMAT_VERSION = 1

_HEADER = struct.Struct("<4sHHII")


class DacMatFormatError(ValueError):
    """Raised for malformed ``.dacmat`` payloads."""


@dataclass(frozen=True, eq=False)
class EmissionMatrix:
    """M x N matrix of DAC codes, one row per element, plus its sample rate."""

    codes: np.ndarray
    sample_rate: float
    provenance: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        c = np.asarray(self.codes)
        if c.ndim != 2 or c.shape[0] == 0 or c.shape[1] == 0:
            raise ValueError("codes must be a non-empty 2-D matrix")
        if c.min() < 0 or c.max() > DAC_MAX_CODE:
            raise ValueError("codes must fit in 12 bits (0..4095)")
        if self.sample_rate <= 0:
            raise ValueError("sample rate must be positive")
        c = c.astype(np.uint16)
        c.setflags(write=False)
        object.__setattr__(self, "codes", c)

    @property
    def n_elements(self) -> int:
        return self.codes.shape[0]

    @property
    def n_samples(self) -> int:
        return self.codes.shape[1]


def assemble_emission_matrix(
    geometry: ArrayGeometry,
    angles: SteerAngles,
    waveform: Waveform,
    c: float = 343.0,
    weights: np.ndarray | None = None,
) -> EmissionMatrix:
    """Build the steered DAC matrix for a waveform.

    Row m holds the quantized (optionally weighted) waveform shifted right
    by the element's integer sample delay, with silence code 2048 before
    the shift and after the waveform. The row length is
    ``len(waveform) + max(shift)`` so no row is truncated.
    """
    if len(waveform) == 0:
        raise ValueError("waveform must not be empty")
    m_count = geometry.n_elements
    if weights is None:
        weights = np.ones(m_count)
    else:
        weights = np.asarray(weights, dtype=float)
        if weights.shape != (m_count,):
            raise ValueError("weights length must match the element count")
        if np.any(weights < 0) or np.any(weights > 1):
            raise ValueError("weights must lie in [0, 1]")

    shifts = quantize_delays(transmit_delays(geometry, angles, c), waveform.sample_rate)
    n_total = len(waveform) + shifts.max_shift
    codes = np.full((m_count, n_total), DAC_SILENCE_CODE, dtype=np.uint16)
    for m in range(m_count):
        row = quantize_to_dac(weights[m] * waveform.samples)
        k = int(shifts.k[m])
        codes[m, k : k + len(waveform)] = row.codes
    provenance = {
        "theta_rad": angles.theta,
        "phi_rad": angles.phi,
        "speed_of_sound": float(c),
        "geometry_digest": geometry.digest(),
    }
    return EmissionMatrix(codes, waveform.sample_rate, provenance)


def write_dacmat(matrix: EmissionMatrix, destination) -> None:
    """Serialize a matrix to the ``.dacmat`` binary format (path or stream)."""
    fs = round(matrix.sample_rate)
    if fs != matrix.sample_rate:
        raise ValueError("dacmat stores integer sample rates in Hz")
    header = _HEADER.pack(
        DACMAT_MAGIC, DACMAT_VERSION, matrix.n_elements, matrix.n_samples, fs
    )
    payload = matrix.codes.astype("<u2").tobytes()
    if hasattr(destination, "write"):
        destination.write(header + payload)
    else:
        with open(destination, "wb") as fh:
            fh.write(header + payload)


def read_dacmat(source) -> EmissionMatrix:
    """Parse a ``.dacmat`` file back into an EmissionMatrix (bit-exact)."""
    if hasattr(source, "read"):
        blob = source.read()
    else:
        with open(source, "rb") as fh:
            blob = fh.read()
    if len(blob) < _HEADER.size:
        raise DacMatFormatError("truncated dacmat header")
    magic, version, m, n, fs = _HEADER.unpack_from(blob)
    if magic != DACMAT_MAGIC:
        raise DacMatFormatError(f"bad magic {magic!r}")
    if version != DACMAT_VERSION:
        raise DacMatFormatError(f"unsupported dacmat version {version}")
    if m == 0 or n == 0:
        raise DacMatFormatError("dacmat dimensions must be non-zero")
    expected = m * n * 2
    payload = blob[_HEADER.size :]
    if len(payload) != expected:
        raise DacMatFormatError(
            f"payload holds {len(payload)} bytes, expected {expected}"
        )
    codes = np.frombuffer(payload, dtype="<u2").reshape(m, n)
    if codes.max() > DAC_MAX_CODE:
        raise DacMatFormatError("payload contains codes above 4095")
    return EmissionMatrix(codes, float(fs))
