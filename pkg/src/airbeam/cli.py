"""Command-line front end: reproducible experiments emitting CSV, PGM,
JSON, and PNG artifacts.

Subcommands: ``geometry`` (layout and derived constants), ``simulate``
(frequency-angle energy maps per steering angle), ``sweep`` (virtual
pan-tilt measurement of an emitted waveform). Lengths are given in
millimeters and angles in degrees on this boundary; exit codes are 0 on
success, 2 for config validation failures, 3 for runtime failures.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    band_power_pattern,
    grating_onset_from_map,
    psd_to_csv,
    sweep_frequency_map,
    welch_psd,
)
from .emission import assemble_emission_matrix, read_dacmat, write_dacmat
from .fieldsim import (
    field_grid_sidecar,
    field_grid_to_csv,
    field_grid_to_pgm,
    frequency_angle_map,
    pan_tilt_sweep,
)
from .geometry import build_staggered_array, geometry_to_csv, projected_pitch
from .steering import (
    SteerAngles,
    nyquist_steering_limit,
    quantize_delays,
    transmit_delays,
    visible_grating_onset,
)
from .waveform import ChirpSpec, log_chirp, multisine, sine_burst, waveform_to_raw

__all__ = ["ExperimentConfig", "main", "entry"]

_DEFAULT_WAVEFORM = {
    "type": "log_chirp",
    "f_start": 100e3,
    "f_end": 20e3,
    "duration_ms": 5.0,
    "amplitude": 1.0,
    "window": ["tukey", 0.1],
}


@dataclass
class ExperimentConfig:
    """Resolved experiment parameters shared by all subcommands."""

    rows: int = 2
    cols: int = 16
    pitch_mm: float = 6.1
    stagger_mm: float | None = None  # defaults to pitch_mm / 2
    row_dz_mm: float | None = None  # defaults to pitch_mm
    c: float = 343.0
    fs: float = 1e6
    theta: float = 0.0  # degrees
    phi: list[float] = field(default_factory=lambda: [0.0, -40.0, 80.0])
    f_min: float = 20e3
    f_max: float = 100e3
    f_step: float = 500.0
    angle_step: float = 1.0
    distance: float = 1.5
    threshold_db: float = -6.0
    norm: str = "global"
    mode: str = "continuous"
    out: str = "out"
    waveform: dict = field(default_factory=lambda: dict(_DEFAULT_WAVEFORM))
    save_waveforms: bool = False

    def geometry(self):
        stagger = None if self.stagger_mm is None else self.stagger_mm * 1e-3
        row_dz = None if self.row_dz_mm is None else self.row_dz_mm * 1e-3
        return build_staggered_array(self.rows, self.cols, self.pitch_mm * 1e-3, stagger, row_dz)

    def steer(self, phi_deg: float) -> SteerAngles:
        return SteerAngles.from_degrees(self.theta, phi_deg)

    def freqs(self) -> np.ndarray:
        if self.f_step <= 0 or self.f_min <= 0 or self.f_max < self.f_min:
            raise ValueError("need 0 < f_min <= f_max and f_step > 0")
        return np.arange(self.f_min, self.f_max + self.f_step / 2, self.f_step)

    def pan_angles(self) -> np.ndarray:
        if self.angle_step <= 0:
            raise ValueError("angle_step must be positive")
        return np.arange(-90.0, 90.0 + self.angle_step / 2, self.angle_step)

    def build_waveform(self):
        spec = dict(_DEFAULT_WAVEFORM)
        spec.update(self.waveform or {})
        kind = spec.get("type", "log_chirp")
        window = spec.get("window")
        if isinstance(window, list):
            window = tuple(window)
        if kind == "log_chirp":
            chirp = ChirpSpec(
                f_start=float(spec["f_start"]),
                f_end=float(spec["f_end"]),
                duration=float(spec["duration_ms"]) * 1e-3,
                amplitude=float(spec.get("amplitude", 1.0)),
                window=window if window is not None else ("tukey", 0.1),
            )
            return log_chirp(chirp, self.fs)
        if kind == "sine_burst":
            return sine_burst(
                float(spec["freq"]),
                int(spec["cycles"]),
                self.fs,
                amplitude=float(spec.get("amplitude", 1.0)),
                window=window if window is not None else "boxcar",
            )
        if kind == "multisine":
            return multisine(
                spec["freqs"],
                spec.get("amps"),
                spec.get("phases"),
                float(spec["duration_ms"]) * 1e-3,
                self.fs,
                amplitude=float(spec.get("amplitude", 1.0)),
            )
        raise ValueError(f"unknown waveform type {kind!r}")

    def validate(self, command: str) -> None:
        """Check every module precondition needed by ``command`` upfront."""
        geometry = self.geometry()
        if self.c <= 0:
            raise ValueError("speed of sound must be positive")
        if self.norm not in ("global", "per-row"):
            raise ValueError("norm must be 'global' or 'per-row'")
        if self.mode not in ("continuous", "quantized"):
            raise ValueError("mode must be 'continuous' or 'quantized'")
        if command == "geometry":
            projected_pitch(geometry)
            return
        if self.fs <= 0:
            raise ValueError("fs must be positive")
        for phi_deg in self.phi:
            self.steer(phi_deg)
        if command == "simulate":
            self.freqs()
            self.pan_angles()
            projected_pitch(geometry)
        if command == "sweep":
            if len(self.phi) != 1:
                raise ValueError("sweep uses a single steering angle")
            if self.distance <= 0:
                raise ValueError("distance must be positive")
            if self.threshold_db >= 0:
                raise ValueError("threshold_db must be negative")
            self.freqs()
            self.pan_angles()
            self.build_waveform()

    def resolved(self) -> dict:
        return dataclasses.asdict(self)


def _config_sha256(cfg: ExperimentConfig) -> str:
    resolved = cfg.resolved()
    # Hash the experiment, not where its files land.
    resolved.pop("out", None)
    resolved.pop("save_waveforms", None)
    canonical = json.dumps(resolved, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _provenance(cfg: ExperimentConfig) -> dict:
    return {
        "tool": "airbeam",
        "version": __version__,
        "config_sha256": _config_sha256(cfg),
    }


def _atomic_write(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def _write_text(path: Path, render) -> None:
    buf = io.StringIO()
    render(buf)
    _atomic_write(path, buf.getvalue().encode("utf-8"))


def _write_binary(path: Path, render) -> None:
    buf = io.BytesIO()
    render(buf)
    _atomic_write(path, buf.getvalue())


def _write_json(path: Path, payload: dict) -> None:
    _atomic_write(path, (json.dumps(payload, indent=2, sort_keys=True) + "\n").encode("utf-8"))


def _provenance_comment(cfg: ExperimentConfig) -> str:
    return "provenance: " + json.dumps(_provenance(cfg), sort_keys=True)


def _png_metadata(cfg: ExperimentConfig) -> dict:
    return {"provenance": json.dumps(_provenance(cfg), sort_keys=True)}


def _save_figure(path: Path, render) -> None:
    buf = io.BytesIO()
    render(buf)
    _atomic_write(path, buf.getvalue())


def _phi_tag(phi_deg: float) -> str:
    return ("%+g" % phi_deg).replace(".", "_")


def cmd_geometry(cfg: ExperimentConfig, out_dir: Path) -> int:
    from .plotting import save_geometry_png

    geometry = cfg.geometry()
    d_proj = projected_pitch(geometry)
    limit = cfg.c / (2.0 * d_proj)
    comment = _provenance_comment(cfg)

    _write_text(out_dir / "elements.csv", lambda fh: geometry_to_csv(geometry, fh, comment))
    _save_figure(
        out_dir / "geometry.png",
        lambda fh: save_geometry_png(
            geometry, fh, title=f"{geometry.n_elements} elements", metadata=_png_metadata(cfg)
        ),
    )
    _write_json(
        out_dir / "geometry_summary.json",
        {
            "n_elements": geometry.n_elements,
            "projected_pitch_mm": d_proj * 1e3,
            "broadside_grating_limit_hz": limit,
            "speed_of_sound": cfg.c,
            "provenance": _provenance(cfg),
        },
    )
    print(f"elements: {geometry.n_elements}")
    print(f"projected pitch: {d_proj * 1e3:.4g} mm")
    print(f"broadside grating-lobe limit c/(2*d_proj): {limit / 1e3:.4g} kHz")
    return 0


def cmd_simulate(cfg: ExperimentConfig, out_dir: Path) -> int:
    from .plotting import save_field_grid_png

    geometry = cfg.geometry()
    d_proj = projected_pitch(geometry)
    freqs = cfg.freqs()
    angles = cfg.pan_angles()
    comment = _provenance_comment(cfg)
    summary = {"provenance": _provenance(cfg), "steerings": []}

    for phi_deg in cfg.phi:
        grid = frequency_angle_map(
            geometry,
            cfg.steer(phi_deg),
            freqs,
            angles,
            c=cfg.c,
            mode=cfg.mode,
            sample_rate=cfg.fs if cfg.mode == "quantized" else None,
            normalization=cfg.norm,
        )
        tag = _phi_tag(phi_deg)
        _write_text(out_dir / f"map_{tag}.csv", lambda fh, g=grid: field_grid_to_csv(g, fh, comment))
        _write_binary(
            out_dir / f"map_{tag}.pgm",
            lambda fh, g=grid: field_grid_to_pgm(g, fh, comment=comment),
        )
        sidecar = field_grid_sidecar(grid)
        sidecar["provenance"] = _provenance(cfg)
        _write_json(out_dir / f"map_{tag}.json", sidecar)
        _save_figure(
            out_dir / f"map_{tag}.png",
            lambda fh, g=grid, p=phi_deg: save_field_grid_png(
                g, fh, title=f"steering {p:g} deg", metadata=_png_metadata(cfg)
            ),
        )

        onset = grating_onset_from_map(grid, cfg.threshold_db)
        phi_rad = math.radians(phi_deg)
        entry = {
            "phi_deg": phi_deg,
            "aliasing_limit_hz": nyquist_steering_limit(d_proj, phi_rad, cfg.c),
            "visible_grating_onset_hz": visible_grating_onset(d_proj, phi_rad, cfg.c),
            "map_onset_hz": onset,
            "files": [f"map_{tag}.{ext}" for ext in ("csv", "pgm", "json", "png")],
        }
        if math.isinf(entry["aliasing_limit_hz"]):
            entry["aliasing_limit_hz"] = None
        summary["steerings"].append(entry)
        onset_txt = "none in band" if onset is None else f"{onset / 1e3:.1f} kHz"
        print(f"phi={phi_deg:+g} deg: map onset {onset_txt} "
              f"(visible-region prediction {entry['visible_grating_onset_hz'] / 1e3:.1f} kHz)")

    _write_json(out_dir / "simulate_summary.json", summary)
    return 0


def cmd_sweep(cfg: ExperimentConfig, out_dir: Path) -> int:
    from .plotting import save_band_power_png, save_field_grid_png, save_signal_report_png

    geometry = cfg.geometry()
    phi_deg = cfg.phi[0]
    steer = cfg.steer(phi_deg)
    wave = cfg.build_waveform()
    matrix = assemble_emission_matrix(geometry, steer, wave, cfg.c)
    comment = _provenance_comment(cfg)

    dacmat_path = out_dir / "emission.dacmat"
    _write_binary(dacmat_path, lambda fh: write_dacmat(matrix, fh))
    reloaded = read_dacmat(dacmat_path)
    if not np.array_equal(reloaded.codes, matrix.codes) or reloaded.sample_rate != matrix.sample_rate:
        raise RuntimeError("emission matrix did not survive the dacmat round trip")

    angles = cfg.pan_angles()
    records = pan_tilt_sweep(geometry, reloaded, cfg.distance, angles, cfg.c)

    grid = sweep_frequency_map(records, cfg.f_min, cfg.f_max, normalization=cfg.norm)
    _write_text(out_dir / "sweep_map.csv", lambda fh: field_grid_to_csv(grid, fh, comment))
    _write_binary(out_dir / "sweep_map.pgm", lambda fh: field_grid_to_pgm(grid, fh, comment=comment))
    sidecar = field_grid_sidecar(grid)
    sidecar["provenance"] = _provenance(cfg)
    _write_json(out_dir / "sweep_map.json", sidecar)
    _save_figure(
        out_dir / "sweep_map.png",
        lambda fh: save_field_grid_png(
            grid, fh, title=f"pan-tilt sweep, steering {phi_deg:g} deg",
            metadata=_png_metadata(cfg),
        ),
    )

    pan, power_db = band_power_pattern(records, cfg.f_min, cfg.f_max)
    _write_text(
        out_dir / "band_power.csv",
        lambda fh: fh.write(
            f"# {comment}\npan_angle_deg,power_db\n"
            + "".join(f"{float(a)!r},{float(p)!r}\n" for a, p in zip(pan, power_db))
        ),
    )
    _save_figure(
        out_dir / "band_power.png",
        lambda fh: save_band_power_png(
            pan, power_db, fh, steer_deg=phi_deg, metadata=_png_metadata(cfg)
        ),
    )

    # Signal report for the pan angle nearest the steering direction.
    nearest = int(np.argmin(np.abs(pan - phi_deg)))
    _save_figure(
        out_dir / "steered_signal.png",
        lambda fh: save_signal_report_png(
            records[nearest][1], fh, title=f"received at pan {pan[nearest]:g} deg",
            metadata=_png_metadata(cfg),
        ),
    )
    seg = min(1024, len(records[nearest][1]))
    psd_freqs, psd = welch_psd(records[nearest][1], segment_len=seg)
    _write_text(out_dir / "steered_psd.csv", lambda fh: psd_to_csv(psd_freqs, psd, fh, comment))

    if cfg.save_waveforms:
        wdir = out_dir / "waveforms"
        wdir.mkdir(parents=True, exist_ok=True)
        for a, rec in records:
            waveform_to_raw(rec, wdir / f"pan{_phi_tag(a)}.raw")

    argmax_deg = float(pan[np.argmax(power_db)])
    _write_json(
        out_dir / "sweep_summary.json",
        {
            "phi_deg": phi_deg,
            "distance_m": cfg.distance,
            "band_hz": [cfg.f_min, cfg.f_max],
            "band_power_argmax_deg": argmax_deg,
            "emission": {
                "rows": matrix.n_elements,
                "samples": matrix.n_samples,
                "sample_rate_hz": matrix.sample_rate,
                "max_shift": quantize_delays(
                    transmit_delays(geometry, steer, cfg.c), cfg.fs
                ).max_shift,
            },
            "provenance": _provenance(cfg),
        },
    )
    print(f"steering {phi_deg:+g} deg: band-power maximum at {argmax_deg:+g} deg")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="airbeam",
        description="Broadband transmit beam-steering simulator for staggered ultrasound arrays.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, with_phi_list: bool) -> None:
        p.add_argument("--config", type=str, help="JSON config file; flags override its keys")
        p.add_argument("--rows", type=int)
        p.add_argument("--cols", type=int)
        p.add_argument("--pitch-mm", dest="pitch_mm", type=float)
        p.add_argument("--stagger-mm", dest="stagger_mm", type=float)
        p.add_argument("--row-dz-mm", dest="row_dz_mm", type=float)
        p.add_argument("--c", type=float, help="speed of sound [m/s]")
        p.add_argument("--fs", type=float, help="DAC update rate [Hz]")
        p.add_argument("--theta", type=float, help="elevation steering [deg]")
        if with_phi_list:
            p.add_argument("--phi", type=str, help="azimuth steering [deg], comma separated")
        else:
            p.add_argument("--phi", type=float, help="azimuth steering [deg]")
        p.add_argument("--f-min", dest="f_min", type=float)
        p.add_argument("--f-max", dest="f_max", type=float)
        p.add_argument("--f-step", dest="f_step", type=float)
        p.add_argument("--angle-step", dest="angle_step", type=float)
        p.add_argument("--distance", type=float, help="receiver distance [m]")
        p.add_argument("--threshold-db", dest="threshold_db", type=float)
        p.add_argument("--norm", choices=["global", "per-row"])
        p.add_argument("--mode", choices=["continuous", "quantized"])
        p.add_argument("--out", type=str, help="output directory")

    p_geo = sub.add_parser("geometry", help="emit the element layout and derived constants")
    add_common(p_geo, with_phi_list=False)

    p_sim = sub.add_parser("simulate", help="emit frequency-angle energy maps per steering angle")
    add_common(p_sim, with_phi_list=True)

    p_swp = sub.add_parser("sweep", help="run the virtual pan-tilt measurement")
    add_common(p_swp, with_phi_list=False)
    p_swp.add_argument("--duration-ms", dest="duration_ms", type=float, help="chirp duration [ms]")
    p_swp.add_argument("--f-start", dest="f_start", type=float, help="chirp start frequency [Hz]")
    p_swp.add_argument("--f-end", dest="f_end", type=float, help="chirp end frequency [Hz]")
    p_swp.add_argument("--save-waveforms", dest="save_waveforms", action="store_true", default=None)
    return parser


def _resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    cfg = ExperimentConfig()
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            file_cfg = json.load(fh)
        if not isinstance(file_cfg, dict):
            raise ValueError("config file must hold a JSON object")
        known = {f.name for f in dataclasses.fields(ExperimentConfig)}
        for key, value in file_cfg.items():
            if key not in known:
                raise ValueError(f"unknown config key {key!r}")
            setattr(cfg, key, value)

    for key in (
        "rows", "cols", "pitch_mm", "stagger_mm", "row_dz_mm", "c", "fs", "theta",
        "f_min", "f_max", "f_step", "angle_step", "distance", "threshold_db",
        "norm", "mode", "out", "save_waveforms",
    ):
        value = getattr(args, key, None)
        if value is not None:
            setattr(cfg, key, value)

    if getattr(args, "phi", None) is not None:
        if isinstance(args.phi, str):
            cfg.phi = [float(v) for v in args.phi.split(",") if v.strip() != ""]
        else:
            cfg.phi = [float(args.phi)]
    elif args.command == "sweep" and len(cfg.phi) > 1:
        cfg.phi = [cfg.phi[0]]

    for key in ("duration_ms", "f_start", "f_end"):
        value = getattr(args, key, None)
        if value is not None:
            cfg.waveform = dict(cfg.waveform)
            cfg.waveform[key] = value

    if isinstance(cfg.phi, (int, float)):
        cfg.phi = [float(cfg.phi)]
    cfg.phi = [float(v) for v in cfg.phi]
    if not cfg.phi:
        raise ValueError("at least one steering angle is required")
    return cfg


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)

    try:
        cfg = _resolve_config(args)
        cfg.validate(args.command)
        out_dir = Path(cfg.out)
        out_dir.mkdir(parents=True, exist_ok=True)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    try:
        if args.command == "geometry":
            return cmd_geometry(cfg, out_dir)
        if args.command == "simulate":
            return cmd_simulate(cfg, out_dir)
        return cmd_sweep(cfg, out_dir)
    except (ValueError, ArithmeticError, RuntimeError, OSError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 3


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
