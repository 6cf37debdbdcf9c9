import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from airbeam import (
    DelayProfile,
    SteerAngles,
    build_staggered_array,
    horizontal_plane_delays,
    nyquist_steering_limit,
    quantize_delays,
    steering_vector,
    transmit_delays,
    visible_grating_onset,
)
from airbeam.steering import (
    delay_profile_from_csv,
    delay_profile_to_csv,
    sample_delays_from_csv,
    sample_delays_to_csv,
)

from conftest import C, D_PROJ, PITCH

angles_st = st.tuples(
    st.floats(-math.pi / 2, math.pi / 2), st.floats(-math.pi, math.pi)
)


def test_steering_vector_trivial_directions():
    assert steering_vector(SteerAngles(0.0, 0.0)) == pytest.approx([1.0, 0.0, 0.0])
    assert steering_vector(SteerAngles(0.0, math.pi / 2)) == pytest.approx(
        [0.0, 1.0, 0.0], abs=1e-15
    )
    for phi in (0.0, 1.0, -2.5):
        assert steering_vector(SteerAngles(math.pi / 2, phi)) == pytest.approx(
            [0.0, 0.0, 1.0], abs=1e-15
        )


@given(angles_st)
def test_steering_vector_has_unit_norm(tp):
    theta, phi = tp
    u = steering_vector(SteerAngles(theta, phi))
    assert abs(np.linalg.norm(u) - 1.0) < 1e-12


def test_angle_ranges_validated():
    with pytest.raises(ValueError):
        SteerAngles(2.0, 0.0)
    with pytest.raises(ValueError):
        SteerAngles(0.0, 4.0)
    a = SteerAngles.from_degrees(45.0, -40.0)
    assert a.theta == pytest.approx(math.pi / 4)


def test_broadside_delays_are_zero(array32):
    tau = transmit_delays(array32, SteerAngles(0.0, 0.0), C).tau
    assert np.all(tau == 0.0)


def test_delay_for_offset_element_matches_dot_product_oracle():
    # Elements at y = -/+ 3.05 mm; steering along +Y. Oracle: -(y*1)/c.
    g = build_staggered_array(1, 2, PITCH, 0.0, 0.0)
    tau = transmit_delays(g, SteerAngles(0.0, math.pi / 2), C).tau
    expected = -(PITCH / 2) / C  # -8.892e-6 s
    assert tau[1] == pytest.approx(expected, rel=1e-12)
    assert expected == pytest.approx(-8.892e-6, abs=5e-10)


def test_vertical_steering_depends_only_on_z(array32):
    tau = transmit_delays(array32, SteerAngles(math.pi / 2, 0.3), C).tau
    # Same z => same delay regardless of y (cos(theta) ~ 0 kills the y term).
    row0, row1 = tau[:16], tau[16:]
    assert np.max(np.abs(row0 - row0[0])) < 1e-18
    assert np.max(np.abs(row1 - row1[0])) < 1e-18


def test_horizontal_plane_examples():
    assert np.all(horizontal_plane_delays(8, PITCH, 0.0, C).tau == 0.0)
    tau = horizontal_plane_delays(2, PITCH, math.radians(30.0), C).tau
    assert tau[1] == pytest.approx(-PITCH * 0.5 / C, rel=1e-12)
    assert tau[1] == pytest.approx(-8.892e-6, abs=5e-10)


def test_horizontal_plane_matches_centered_row_up_to_offset():
    g = build_staggered_array(1, 8, PITCH, 0.0, 0.0)
    phi = math.radians(25.0)
    centered = transmit_delays(g, SteerAngles(0.0, phi), C).tau
    indexed = horizontal_plane_delays(8, PITCH, phi, C).tau
    diff = indexed - centered
    assert np.max(np.abs(diff - diff[0])) < 1e-18


def test_delays_are_odd_in_phi_with_reversed_order(array32):
    phi = math.radians(33.0)
    fwd = transmit_delays(array32, SteerAngles(0.0, phi), C).tau
    bwd = transmit_delays(array32, SteerAngles(0.0, -phi), C).tau
    # Mirroring phi maps element (r, i) onto (1-r, 15-i) in the staggered grid.
    mirror = np.array([(1 - (m // 16)) * 16 + (15 - m % 16) for m in range(32)])
    assert bwd == pytest.approx(fwd[mirror], rel=1e-9, abs=1e-20)


def test_delays_scale_inversely_with_sound_speed(array32):
    a = SteerAngles(0.2, -1.0)
    tau1 = transmit_delays(array32, a, C).tau
    tau2 = transmit_delays(array32, a, 2.0 * C).tau
    assert tau2 == pytest.approx(tau1 / 2.0, rel=1e-12)


def test_quantize_examples():
    zero = quantize_delays(DelayProfile(np.zeros(4), C), 1e6)
    assert np.all(zero.k == 0) and zero.offset == 0.0

    sd = quantize_delays(DelayProfile(np.array([-8.892e-6, 0.0]), C), 1e6)
    assert sd.offset == pytest.approx(-8.892e-6)
    assert sd.k.tolist() == [0, 8]

    sub = quantize_delays(DelayProfile(np.array([-0.4e-6, 0.0]), C), 1e6)
    assert sub.k.tolist() == [0, 0]


@settings(max_examples=200)
@given(
    st.lists(st.floats(-1e-3, 1e-3, allow_nan=False), min_size=1, max_size=64),
    st.floats(1e3, 1e8),
)
def test_quantize_residual_bounds(taus, fs):
    profile = DelayProfile(np.array(taus), C)
    sd = quantize_delays(profile, fs)
    resid = (profile.tau - sd.offset) * fs - sd.k
    assert sd.k.min() == 0
    assert np.all(sd.k >= 0)
    assert np.all(resid >= 0.0) and np.all(resid < 1.0)


def test_nyquist_limit_values():
    assert nyquist_steering_limit(D_PROJ, math.pi / 2, 343.0) == pytest.approx(56229.508196721305)
    assert nyquist_steering_limit(D_PROJ, math.pi / 2, 355.0) == pytest.approx(58196.721311475405)
    assert nyquist_steering_limit(D_PROJ, 0.0, 343.0) == math.inf


def test_visible_onset_values():
    assert visible_grating_onset(D_PROJ, math.radians(40.0), 343.0) == pytest.approx(
        68456.2117, abs=0.1
    )
    assert visible_grating_onset(D_PROJ, 0.0, 343.0) == pytest.approx(112459.0163934, abs=0.01)


def test_limits_coincide_at_ninety_degrees():
    phi = math.pi / 2
    assert nyquist_steering_limit(D_PROJ, phi, C) == visible_grating_onset(D_PROJ, phi, C)


@pytest.mark.parametrize("fn", [nyquist_steering_limit, visible_grating_onset])
def test_limits_reject_bad_inputs(fn):
    with pytest.raises(ValueError):
        fn(0.0, 1.0, C)
    with pytest.raises(ValueError):
        fn(D_PROJ, 1.0, 0.0)


def test_transmit_delays_rejects_bad_speed(array32):
    with pytest.raises(ValueError):
        transmit_delays(array32, SteerAngles(0.0, 0.0), 0.0)


def test_profile_csv_round_trips(array32):
    profile = transmit_delays(array32, SteerAngles(0.0, 0.7), C)
    buf = io.StringIO()
    delay_profile_to_csv(profile, buf)
    back = delay_profile_from_csv(io.StringIO(buf.getvalue()), C)
    assert np.array_equal(back.tau, profile.tau)
    again = io.StringIO()
    delay_profile_to_csv(back, again)
    assert again.getvalue() == buf.getvalue()

    sd = quantize_delays(profile, 1e6)
    buf = io.StringIO()
    sample_delays_to_csv(sd, buf)
    back = sample_delays_from_csv(io.StringIO(buf.getvalue()), sd.offset, sd.sample_rate)
    assert np.array_equal(back.k, sd.k)
