import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from leofim.geometry import (
    SPEED_OF_LIGHT,
    GeometryError,
    ReceiverState,
    SatelliteState,
    antenna_position,
    doppler_position_gradient,
    doppler_shift,
    link_geometry,
    propagation_delay,
    rotation_derivatives,
    rotation_matrix,
    unit_direction,
)

angles = st.floats(-10.0, 10.0, allow_nan=False)


def test_unit_direction_examples():
    np.testing.assert_allclose(unit_direction(0.0, 0.0), [0, 0, 1], atol=1e-15)
    np.testing.assert_allclose(unit_direction(0.0, np.pi / 2), [1, 0, 0], atol=1e-15)
    r6 = np.sqrt(6) / 4
    np.testing.assert_allclose(unit_direction(np.pi / 4, np.pi / 3), [r6, r6, 0.5], rtol=1e-14)


def test_unit_direction_rejects_non_finite():
    with pytest.raises(GeometryError):
        unit_direction(np.nan, 0.0)
    with pytest.raises(GeometryError):
        unit_direction(0.0, np.inf)


def test_unit_direction_norm_random(rng):
    az = rng.uniform(-np.pi, np.pi, 1000)
    el = rng.uniform(0, np.pi, 1000)
    norms = [np.linalg.norm(unit_direction(a, e)) for a, e in zip(az, el)]
    assert np.max(np.abs(np.array(norms) - 1)) < 1e-12


def test_rotation_examples():
    np.testing.assert_array_equal(rotation_matrix([0, 0, 0]), np.eye(3))
    np.testing.assert_allclose(rotation_matrix([np.pi / 2, 0, 0]) @ [1, 0, 0], [0, 1, 0], atol=1e-15)
    # ZYX: pitch about y sends x to -z, roll about x sends y to z
    np.testing.assert_allclose(rotation_matrix([0, np.pi / 2, 0]) @ [1, 0, 0], [0, 0, -1], atol=1e-15)
    np.testing.assert_allclose(rotation_matrix([0, 0, np.pi / 2]) @ [0, 1, 0], [0, 0, 1], atol=1e-15)


def test_rotation_orthonormal_random(rng):
    for phi in rng.uniform(-np.pi, np.pi, (1000, 3)):
        q = rotation_matrix(phi)
        assert np.abs(q.T @ q - np.eye(3)).max() < 1e-12
        assert abs(np.linalg.det(q) - 1) < 1e-12


@given(st.tuples(angles, angles, angles))
@settings(max_examples=50, deadline=None)
def test_rotation_derivatives_match_finite_differences(phi):
    phi = np.array(phi)
    d = rotation_derivatives(phi)
    h = 1e-6
    for j in range(3):
        e = np.zeros(3)
        e[j] = h
        fd = (rotation_matrix(phi + e) - rotation_matrix(phi - e)) / (2 * h)
        np.testing.assert_allclose(d[j], fd, atol=1e-9)


def test_antenna_position_examples():
    rx = ReceiverState(position=[1.0, 2.0, 3.0])
    np.testing.assert_array_equal(antenna_position(rx, 0, 0, 10.0), [1, 2, 3])
    rx = ReceiverState(position=[1.0, 2.0, 3.0], offsets=[[0.1, 0.2, 0.3], [0, 0, 0]])
    np.testing.assert_allclose(antenna_position(rx, 0, 0, 10.0), [1.1, 2.2, 3.3])
    rx = ReceiverState(speed=1.0, azimuth=0.0, elevation=np.pi / 2)
    np.testing.assert_allclose(antenna_position(rx, 0, 2, 10.0), [20, 0, 0], atol=1e-12)
    with pytest.raises(IndexError):
        antenna_position(rx, 1, 0, 10.0)


def test_receiver_invariants():
    with pytest.raises(GeometryError, match="distinct"):
        ReceiverState(offsets=[[0, 0, 0], [0, 0, 0]])
    with pytest.raises(GeometryError):
        ReceiverState(speed=-1.0)


def test_propagation_delay_examples():
    assert propagation_delay([0, 0, 0], [0, 0, 0]) == 0.0
    d = propagation_delay([0, 0, 0], [0, 0, 5e5])
    assert d == pytest.approx(5e5 / 299792458, rel=1e-15)
    assert d == pytest.approx(1.667820e-3, rel=1e-6)
    a, b = np.array([1.0, -2.0, 3e5]), np.array([4e5, 7.0, 0.5])
    assert propagation_delay(a, b) == propagation_delay(b, a)


def test_doppler_shift_examples():
    delta = unit_direction(0.3, 1.1)
    assert doppler_shift(delta, [1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == 0.0
    perp = np.cross(delta, [0.0, 0.0, 1.0])
    assert abs(doppler_shift(delta, 7000 * perp / np.linalg.norm(perp), [0, 0, 0])) < 1e-20
    nu = doppler_shift([0, 0, -1], [0, 0, -7500], [0, 0, 0])
    assert nu == pytest.approx(7500 / SPEED_OF_LIGHT, rel=1e-15)
    assert nu == pytest.approx(2.50173e-5, rel=1e-5)
    with pytest.raises(GeometryError):
        doppler_shift([0, 0, 1.1], [0, 0, 1], [0, 0, 0])


def test_doppler_gradient_examples():
    delta = unit_direction(1.0, 0.7)
    np.testing.assert_array_equal(doppler_position_gradient(delta, 6e5, [5, 5, 5], [5, 5, 5]), 0)
    np.testing.assert_allclose(doppler_position_gradient(delta, 6e5, 7000 * delta, [0, 0, 0]), 0, atol=1e-25)
    v = np.array([7000.0, -2000.0, 300.0])
    g1 = doppler_position_gradient(delta, 6e5, v, [0, 0, 0])
    g2 = doppler_position_gradient(delta, 1.2e6, v, [0, 0, 0])
    np.testing.assert_allclose(g2, g1 / 2, rtol=1e-12)
    assert abs(g1 @ delta) <= 1e-12 * np.linalg.norm(g1)
    with pytest.raises(GeometryError):
        doppler_position_gradient(delta, 0.0, v, [0, 0, 0])


def test_doppler_gradient_matches_finite_differences(rng):
    for _ in range(20):
        p_b = rng.normal(0, 5e5, 3) + [0, 0, 6e5]
        v_b = rng.normal(0, 5e3, 3)
        v_u = rng.normal(0, 20, 3)
        p_u = rng.normal(0, 100, 3)

        def nu(p):
            los = p - p_b
            return doppler_shift(los / np.linalg.norm(los), v_b, v_u)

        d = np.linalg.norm(p_u - p_b)
        h = 1e-3
        fd = np.array([(nu(p_u + h * e) - nu(p_u - h * e)) / (2 * h) for e in np.eye(3)])
        an = doppler_position_gradient((p_u - p_b) / d, d, v_b, v_u)
        assert np.abs(fd - an).max() <= 1e-6 * np.abs(an).max()


def test_doppler_gradient_scales_inversely_with_distance(rng):
    sats = [SatelliteState(rng.normal(0, 4e5, 3) + [0, 0, 7e5], 7500.0, (rng.uniform(0, 6),), (rng.uniform(0.5, 2.5),))
            for _ in range(3)]
    rx = ReceiverState()
    g1 = link_geometry(sats, rx, 1, 10.0).doppler_gradient
    scaled = [SatelliteState(10 * s.position, s.speed, s.azimuths, s.elevations) for s in sats]
    g10 = link_geometry(scaled, rx, 1, 10.0).doppler_gradient
    np.testing.assert_allclose(np.linalg.norm(g10, axis=-1), np.linalg.norm(g1, axis=-1) / 10, rtol=1e-9)


def test_link_geometry_invariants(default):
    geo = link_geometry(default.satellites, default.receiver, default.n_slots, default.slot_spacing)
    np.testing.assert_array_equal(geo.delay, geo.distance / 299792458.0)
    assert np.all(np.abs(geo.doppler) < 1e-3)
    np.testing.assert_allclose(np.linalg.norm(geo.direction, axis=-1), 1, atol=1e-12)
    # antenna-specific directions differ from the centroid one only by the array extent
    assert np.abs(geo.direction - geo.centroid_direction[:, None]).max() < 1e-6


def test_satellite_motion_displacement():
    sat = SatelliteState([0.0, 0.0, 5e5], 7500.0, (0.0, np.pi / 2), (np.pi / 2, np.pi / 2))
    np.testing.assert_allclose(sat.position_at(1, 10.0), [0, 75000, 5e5], atol=1e-9)
    with pytest.raises(IndexError):
        sat.direction(2)
    with pytest.raises(GeometryError):
        SatelliteState([0, 0, 1.0], -1.0)
