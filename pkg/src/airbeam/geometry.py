"""Staggered two-row transducer layout and its projected horizontal pitch.

Coordinate frame: X is depth (array normal, forward), Y horizontal, Z
vertical. All lengths in meters. Element layouts are center-referenced:
the centroid of the element set sits at the origin so downstream delay
formulas need no offset handling.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Vec3",
    "ArrayGeometry",
    "build_staggered_array",
    "projected_pitch",
    "geometry_to_csv",
    "geometry_from_csv",
]

# Projected positions closer than this (relative to the aperture span) are
# treated as the same lattice site; absorbs float rounding of the lattice
# construction, orders of magnitude above 1 ulp and below any physical pitch.
_MERGE_RTOL = 1e-9


@dataclass(frozen=True)
class Vec3:
    """Point in the array frame (x depth, y horizontal, z vertical), meters."""

    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        if not all(np.isfinite(v) for v in (self.x, self.y, self.z)):
            raise ValueError("Vec3 components must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)


@dataclass(frozen=True, eq=False)
class ArrayGeometry:
    """Ordered element positions plus the lattice parameters that built them.

    ``positions`` is an (M, 3) float array, row-major over (row, column),
    centroid at the origin, all elements in the Y-Z plane (x == 0).
    """

    positions: np.ndarray
    rows: int
    cols: int
    pitch_y: float
    stagger_y: float
    row_dz: float

    def __post_init__(self) -> None:
        pos = np.asarray(self.positions, dtype=float)
        if pos.ndim != 2 or pos.shape[1] != 3:
            raise ValueError("positions must have shape (M, 3)")
        if not np.all(np.isfinite(pos)):
            raise ValueError("positions must be finite")
        if pos.shape[0] != self.rows * self.cols:
            raise ValueError("element count must equal rows * cols")
        if np.max(np.abs(pos[:, 0])) > 1e-9:
            raise ValueError("elements must lie in the Y-Z plane (x = 0)")
        scale = max(1.0, float(np.max(np.abs(pos))))
        if np.max(np.abs(pos.mean(axis=0))) > 1e-9 * scale:
            raise ValueError("positions must be center-referenced (centroid at origin)")
        if np.unique(pos, axis=0).shape[0] != pos.shape[0]:
            raise ValueError("two elements coincide")
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)

    @property
    def n_elements(self) -> int:
        return self.positions.shape[0]

    @property
    def elements(self) -> tuple[Vec3, ...]:
        return tuple(Vec3(*p) for p in self.positions)

    def digest(self) -> str:
        """Short content hash of the element layout, used for provenance."""
        h = hashlib.sha256(self.positions.tobytes())
        return h.hexdigest()[:12]


def build_staggered_array(
    rows: int,
    cols: int,
    pitch_y: float,
    stagger_y: float | None = None,
    row_dz: float | None = None,
) -> ArrayGeometry:
    """Build a staggered multi-row layout, centered on its centroid.

    Row r, column i is placed at y = i * pitch_y + r * stagger_y and
    z = r * row_dz (x = 0), then the whole set is translated so the
    centroid lands at the origin. Elements are ordered row-major.

    Parameters
    ----------
    rows, cols:
        Grid extent, both >= 1.
    pitch_y:
        In-row element spacing along Y [m], > 0.
    stagger_y:
        Horizontal offset between consecutive rows [m], >= 0.
        Defaults to pitch_y / 2 (half-pitch stagger).
    row_dz:
        Vertical spacing between rows [m], >= 0. Defaults to pitch_y.
    """
    if int(rows) != rows or int(cols) != cols or rows < 1 or cols < 1:
        raise ValueError("rows and cols must be positive integers")
    if pitch_y <= 0:
        raise ValueError("pitch_y must be positive")
    if stagger_y is None:
        stagger_y = pitch_y / 2.0
    if row_dz is None:
        row_dz = pitch_y
    if stagger_y < 0 or row_dz < 0:
        raise ValueError("stagger_y and row_dz must be non-negative")

    rows, cols = int(rows), int(cols)
    r_idx = np.repeat(np.arange(rows), cols)
    i_idx = np.tile(np.arange(cols), rows)
    pos = np.zeros((rows * cols, 3))
    pos[:, 1] = i_idx * pitch_y + r_idx * stagger_y
    pos[:, 2] = r_idx * row_dz
    pos -= pos.mean(axis=0)
    return ArrayGeometry(pos, rows, cols, float(pitch_y), float(stagger_y), float(row_dz))


def projected_pitch(geometry: ArrayGeometry) -> float:
    """Smallest gap between distinct element positions projected onto Y [m].

    For the half-pitch staggered two-row layout the projection interleaves
    the rows and the result is pitch_y / 2. Raises if fewer than two
    distinct projected positions exist.
    """
    ys = np.sort(geometry.positions[:, 1])
    span = float(ys[-1] - ys[0])
    if span == 0.0:
        raise ValueError("need at least two distinct projected positions")
    gaps = np.diff(ys)
    gaps = gaps[gaps > _MERGE_RTOL * span]
    if gaps.size == 0:
        raise ValueError("need at least two distinct projected positions")
    return float(gaps.min())


def geometry_to_csv(geometry: ArrayGeometry | np.ndarray, dest, comment: str | None = None) -> None:
    """Write element positions as CSV with header ``m,x_m,y_m,z_m`` (SI units)."""
    pos = geometry.positions if isinstance(geometry, ArrayGeometry) else np.asarray(geometry, dtype=float)
    lines = []
    if comment:
        lines.append(f"# {comment}")
    lines.append("m,x_m,y_m,z_m")
    for m, (x, y, z) in enumerate(pos):
        lines.append(f"{m},{float(x)!r},{float(y)!r},{float(z)!r}")
    text = "\n".join(lines) + "\n"
    if hasattr(dest, "write"):
        dest.write(text)
    else:
        with open(dest, "w", encoding="utf-8") as fh:
            fh.write(text)


def geometry_from_csv(source) -> np.ndarray:
    """Read an element-position CSV back into an (M, 3) array."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("m,"):
            if line != "m,x_m,y_m,z_m":
                raise ValueError(f"unexpected geometry CSV header: {line!r}")
            continue
        fields = line.split(",")
        if len(fields) != 4:
            raise ValueError(f"malformed geometry CSV row: {line!r}")
        rows.append([float(fields[1]), float(fields[2]), float(fields[3])])
    if not rows:
        raise ValueError("geometry CSV contains no elements")
    return np.array(rows, dtype=float)
