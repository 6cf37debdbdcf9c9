"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines and timings. Every tolerance is pinned here; nothing is calibrated
at runtime.
"""

import io
import math
import random
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.fft import next_fast_len

from airbeam import (
    ChirpSpec,
    EmissionMatrix,
    SteerAngles,
    assemble_emission_matrix,
    band_power_pattern,
    build_staggered_array,
    dequantize_dac,
    frequency_angle_map,
    grating_onset_from_map,
    lobe_metrics,
    log_chirp,
    nyquist_steering_limit,
    pan_tilt_sweep,
    quantize_delays,
    quantize_to_dac,
    read_dacmat,
    spectrogram,
    transmit_delays,
    visible_grating_onset,
    welch_psd,
    write_dacmat,
)
from airbeam.fieldsim import field_grid_from_csv, field_grid_to_csv
from airbeam.geometry import geometry_from_csv, geometry_to_csv
from airbeam.waveform import waveform_from_csv, waveform_to_csv

C = 343.0
FS = 1e6
PITCH = 6.1e-3
D_PROJ = PITCH / 2

BAND_FREQS = np.arange(20e3, 100e3 + 250.0, 500.0)
DEG_ANGLES = np.arange(-90.0, 90.5, 1.0)


def report(criterion: str, ok: bool, detail: str, elapsed: float | None = None) -> None:
    status = "PASS" if ok else "FAIL"
    timing = "" if elapsed is None else f" [{elapsed:.1f}s]"
    print(f"[{status}] {criterion}: {detail}{timing}")


@pytest.fixture(scope="module")
def array32():
    return build_staggered_array(2, 16, PITCH, PITCH / 2, PITCH)


@pytest.fixture(scope="module")
def chirp():
    return log_chirp(ChirpSpec(100e3, 20e3, 5e-3), FS)


def test_criterion_1_broadside_grating_limit(array32):
    t0 = time.perf_counter()
    at_343 = nyquist_steering_limit(D_PROJ, math.pi / 2, 343.0)
    at_355 = nyquist_steering_limit(D_PROJ, math.pi / 2, 355.0)
    ok_343 = abs(at_343 / 1e3 - 56.23) <= 0.005
    ok_355 = abs(at_355 / 1e3 - 58.20) <= 0.005

    grid = frequency_angle_map(
        array32, SteerAngles.from_degrees(0.0, 90.0), BAND_FREQS, DEG_ANGLES, 343.0
    )
    onset = grating_onset_from_map(grid, threshold_db=-6.0)
    ok_map = onset is not None and abs(onset - at_343) <= 2e3
    elapsed = time.perf_counter() - t0
    ok = ok_343 and ok_355 and ok_map and elapsed < 10.0
    report(
        "criterion 1 (broadside grating limit)",
        ok,
        f"limit(343)={at_343:.1f} Hz, limit(355)={at_355:.1f} Hz, "
        f"map onset={onset and f'{onset:.0f} Hz'} (analytic +/-2 kHz)",
        elapsed,
    )
    assert ok_343 and ok_355, "analytic limits off the stated kHz values"
    assert ok_map, f"map onset {onset} vs analytic {at_343}"
    assert elapsed < 10.0


def test_criterion_2_steered_onset(array32):
    t0 = time.perf_counter()
    analytic = visible_grating_onset(D_PROJ, math.radians(40.0), 343.0)
    ok_analytic = abs(analytic - 68450.0) <= 50.0

    grid = frequency_angle_map(
        array32, SteerAngles.from_degrees(0.0, -40.0), BAND_FREQS, DEG_ANGLES, 343.0
    )
    onset = grating_onset_from_map(grid, threshold_db=-6.0)
    ok_map = onset is not None and abs(onset - analytic) <= 3e3
    elapsed = time.perf_counter() - t0
    ok = ok_analytic and ok_map and elapsed < 30.0
    report(
        "criterion 2 (-40 deg onset)",
        ok,
        f"analytic={analytic:.1f} Hz (68.45 kHz +/-50 Hz), "
        f"map onset={onset and f'{onset:.0f} Hz'} (+/-3 kHz, paper-consistent ~70 kHz)",
        elapsed,
    )
    assert ok_analytic, f"visible onset {analytic} not within 68.45 kHz +/- 50 Hz"
    assert ok_map, f"map onset {onset} vs analytic {analytic}"
    assert elapsed < 30.0


def test_criterion_3_broadside_pattern(array32):
    t0 = time.perf_counter()
    grid = frequency_angle_map(array32, SteerAngles(0.0, 0.0), BAND_FREQS, DEG_ANGLES, 343.0)
    argmax_angles = grid.angles_deg[np.argmax(grid.energy_db, axis=1)]
    ok_argmax = bool(np.all(argmax_angles == 0.0))

    # Independent brute-force oracle: direct phasor sum on a 0.01 deg grid.
    f = 40e3
    fine = np.arange(-90.0, 90.0 + 0.005, 0.01)
    y = array32.positions[:, 1]
    phases = 2.0 * math.pi * f / C * np.sin(np.radians(fine))[:, None] * y[None, :]
    mags = np.abs(np.add.reduce(np.exp(1j * phases), axis=1)) / y.size
    pattern = 20.0 * np.log10(np.maximum(mags, 1e-15))
    sll = lobe_metrics(pattern - pattern.max(), fine).sidelobe_level_db
    ok_sll = sll is not None and abs(sll - (-13.2)) <= 0.3
    elapsed = time.perf_counter() - t0
    ok = ok_argmax and ok_sll and elapsed < 60.0
    report(
        "criterion 3 (broadside pattern)",
        ok,
        f"argmax at 0 deg on all {grid.freqs_hz.size} rows: {ok_argmax}, "
        f"40 kHz sidelobe level {sll:.2f} dB (-13.2 +/- 0.3)",
        elapsed,
    )
    assert ok_argmax, "broadside map argmax leaves 0 deg"
    assert ok_sll, f"sidelobe level {sll}"
    assert elapsed < 60.0


def test_criterion_4_delay_correctness():
    t0 = time.perf_counter()
    rng = random.Random(20260810)
    worst_rel = 0.0
    residual_ok = True
    for _ in range(1000):
        rows = rng.randint(1, 3)
        cols = rng.randint(2, 32)
        pitch = rng.uniform(1e-3, 1e-2)
        stagger = rng.uniform(0.0, pitch / 2)
        dz = rng.uniform(1e-4, 1e-2)
        geometry = build_staggered_array(rows, cols, pitch, stagger, dz)
        theta = rng.uniform(-math.pi / 2, math.pi / 2)
        phi = rng.uniform(-math.pi, math.pi)
        c = rng.uniform(300.0, 400.0)
        tau = transmit_delays(geometry, SteerAngles(theta, phi), c).tau

        # Oracle: plain-Python dot product per element.
        ux = math.cos(theta) * math.cos(phi)
        uy = math.cos(theta) * math.sin(phi)
        uz = math.sin(theta)
        for m, (x, y, z) in enumerate(geometry.positions):
            expected = -(x * ux + y * uy + z * uz) / c
            rel = abs(tau[m] - expected) / max(abs(expected), 1e-300)
            worst_rel = max(worst_rel, rel)

        sd = quantize_delays(transmit_delays(geometry, SteerAngles(theta, phi), c), FS)
        resid = (tau - sd.offset) * FS - sd.k
        if sd.k.min() != 0 or resid.min() < 0.0 or resid.max() >= 1.0:
            residual_ok = False
    elapsed = time.perf_counter() - t0
    ok = worst_rel <= 1e-15 and residual_ok
    report(
        "criterion 4 (delay correctness)",
        ok,
        f"1000 random triples, worst oracle deviation {worst_rel:.3g} rel (<=1e-15), "
        f"quantization residuals in [0,1): {residual_ok}",
        elapsed,
    )
    assert worst_rel <= 1e-15
    assert residual_ok


def test_criterion_5_steering_coherence(array32):
    t0 = time.perf_counter()
    details = []
    ok = True
    for phi_deg in (-40.0, 80.0):
        steer = SteerAngles.from_degrees(0.0, phi_deg)
        col = np.array([phi_deg])
        cont = frequency_angle_map(array32, steer, BAND_FREQS, col, C, mode="continuous")
        coherent = float(np.max(np.abs(cont.energy_db)))
        devs = []
        for fs in (1e6, 4e6, 16e6):
            quant = frequency_angle_map(
                array32, steer, BAND_FREQS, col, C, mode="quantized", sample_rate=fs
            )
            devs.append(float(np.max(np.abs(quant.energy_db - cont.energy_db))))
        ok_phi = (
            coherent <= 1e-9
            and devs[0] <= 1.0
            and devs[0] > devs[1] > devs[2]
        )
        ok = ok and ok_phi
        details.append(f"phi={phi_deg:g}: 0dB dev {coherent:.1e}, quantized {devs[0]:.3f}/"
                       f"{devs[1]:.4f}/{devs[2]:.5f} dB @1/4/16 MHz")
    elapsed = time.perf_counter() - t0
    report("criterion 5 (steering coherence)", ok, "; ".join(details), elapsed)
    assert ok


def test_criterion_6_chirp_fidelity(chirp):
    t0 = time.perf_counter()
    freqs, times, mag_db = spectrogram(chirp, frame_len=256, hop=64, window="hann")
    ridge = freqs[np.argmax(mag_db, axis=0)]
    law = 100e3 * (20e3 / 100e3) ** (times / 5e-3)
    bin_width = freqs[1] - freqs[0]
    ridge_err = float(np.max(np.abs(ridge - law)))
    ok_ridge = ridge_err <= bin_width

    pf, psd = welch_psd(chirp, segment_len=1024, overlap=0.5, window="hann")
    db = 10.0 * np.log10(np.maximum(psd, 1e-30))
    guard = pf[1] - pf[0]
    in_band = (pf >= 20e3) & (pf <= 100e3)
    out_band = (pf < 20e3 - guard) | (pf > 100e3 + guard)
    contrast = float(np.median(db[in_band]) - np.max(db[out_band]))
    ok_psd = contrast > 20.0
    elapsed = time.perf_counter() - t0
    ok = ok_ridge and ok_psd and elapsed < 10.0
    report(
        "criterion 6 (chirp fidelity)",
        ok,
        f"ridge error {ridge_err:.0f} Hz (bin {bin_width:.0f} Hz) over {times.size} frames, "
        f"in/out-of-band contrast {contrast:.1f} dB (>20)",
        elapsed,
    )
    assert ok_ridge, f"ridge error {ridge_err} exceeds one bin {bin_width}"
    assert ok_psd, f"band contrast {contrast}"
    assert elapsed < 10.0


def test_criterion_7_virtual_experiment_consistency(array32, chirp):
    t0 = time.perf_counter()
    step = 1.0
    angles = np.arange(-90.0, 90.0 + step / 2, step)
    f_lo, f_hi = 20e3, C / (2.0 * D_PROJ)  # grating-free band of the lattice
    details = []
    ok = True
    for phi_deg in (0.0, -40.0):
        steer = SteerAngles.from_degrees(0.0, phi_deg)
        matrix = assemble_emission_matrix(array32, steer, chirp, C)
        records = pan_tilt_sweep(array32, matrix, 1.5, angles, C)
        pan, rx_db = band_power_pattern(records, f_lo, f_hi)

        # Map route: quantized-delay array factor weighted by the emitted
        # energy spectrum at the same FFT bins.
        nfft = next_fast_len(max(len(w) for _, w in records))
        bins = np.fft.rfftfreq(nfft, 1.0 / FS)
        band = (bins >= f_lo) & (bins <= f_hi)
        weights = np.abs(np.fft.rfft(chirp.samples, nfft)[band]) ** 2
        grid = frequency_angle_map(
            array32, steer, bins[band], angles, C, mode="quantized", sample_rate=FS
        )
        integrated = (10.0 ** (grid.energy_db / 10.0) * weights[:, None]).sum(axis=0)
        map_db = 10.0 * np.log10(integrated / integrated.max())

        dev = float(np.max(np.abs(rx_db - map_db)))
        argmax = float(pan[np.argmax(rx_db)])
        ok_phi = dev <= 1.0 and abs(argmax - phi_deg) <= step
        ok = ok and ok_phi
        details.append(f"phi={phi_deg:g}: max dev {dev:.3f} dB (<=1), argmax {argmax:g} deg")
    elapsed = time.perf_counter() - t0
    report("criterion 7 (virtual experiment)", ok, "; ".join(details), elapsed)
    assert ok


matrices_st = st.integers(1, 6).flatmap(
    lambda m: st.integers(1, 48).flatmap(
        lambda n: st.tuples(
            arrays(np.uint16, (m, n), elements=st.integers(0, 4095)),
            st.integers(1, 10_000_000),
        )
    )
)

waveforms_st = st.lists(
    st.floats(-1.0, 1.0, allow_nan=False, allow_infinity=False), min_size=1, max_size=64
)


def test_criterion_8_round_trips(array32):
    t0 = time.perf_counter()

    @settings(max_examples=60, deadline=None)
    @given(matrices_st)
    def dacmat_round_trip(case):
        codes, fs = case
        matrix = EmissionMatrix(codes, float(fs))
        first = io.BytesIO()
        write_dacmat(matrix, first)
        back = read_dacmat(io.BytesIO(first.getvalue()))
        second = io.BytesIO()
        write_dacmat(back, second)
        assert second.getvalue() == first.getvalue()
        assert np.array_equal(back.codes, matrix.codes)

    @settings(max_examples=60, deadline=None)
    @given(waveforms_st)
    def waveform_csv_round_trip(samples):
        from airbeam import Waveform

        w = Waveform(np.array(samples), FS)
        first = io.StringIO()
        waveform_to_csv(w, first)
        back = waveform_from_csv(io.StringIO(first.getvalue()), FS)
        second = io.StringIO()
        waveform_to_csv(back, second)
        assert second.getvalue() == first.getvalue()
        assert np.array_equal(back.samples, w.samples)

    dacmat_round_trip()
    waveform_csv_round_trip()

    # Geometry and field-grid CSV round trips on real artifacts.
    geo_first = io.StringIO()
    geometry_to_csv(array32, geo_first)
    geo_again = io.StringIO()
    geometry_to_csv(geometry_from_csv(io.StringIO(geo_first.getvalue())), geo_again)
    csv_ok = geo_again.getvalue() == geo_first.getvalue()

    grid = frequency_angle_map(
        array32, SteerAngles.from_degrees(0.0, -40.0), BAND_FREQS[::16], DEG_ANGLES[::15], C
    )
    grid_first = io.StringIO()
    field_grid_to_csv(grid, grid_first)
    grid_again = io.StringIO()
    field_grid_to_csv(field_grid_from_csv(io.StringIO(grid_first.getvalue())), grid_again)
    csv_ok = csv_ok and grid_again.getvalue() == grid_first.getvalue()

    # DAC converter: exhaustive over all 4096 codes, half-LSB bound.
    codes = np.arange(4096)
    levels = dequantize_dac(codes)
    ok_exhaustive = np.array_equal(quantize_to_dac(levels).codes, codes)
    sweep = np.linspace(-1.0, 1.0, 20001)
    err = np.max(np.abs(dequantize_dac(quantize_to_dac(sweep).codes) - sweep))
    ok_dac = ok_exhaustive and err <= (1.0 / 4095.0) * (1 + 1e-9)

    elapsed = time.perf_counter() - t0
    ok = csv_ok and ok_dac
    report(
        "criterion 8 (format round trips)",
        ok,
        f"dacmat+CSV byte-exact over random instances, DAC round-trip error "
        f"{err:.3e} <= 1/4095 ({1 / 4095:.3e})",
        elapsed,
    )
    assert csv_ok
    assert ok_dac
