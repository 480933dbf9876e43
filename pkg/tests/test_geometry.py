"""
Tests for orbit propagation, zero-Doppler geolocation and slant/ground conversion
"""
import math

import numpy as np
import pytest

from src.core.exceptions import (
    NoCrossingError,
    NoIntersectionError,
    TargetAboveSensorError,
    ValidationError,
)
from src.processing.geometry import (
    AcquisitionGeometry,
    AcquisitionMode,
    EarthEllipsoid,
    LookSide,
    OrbitModel,
    StateVector,
    ground_to_slant,
    incidence_angle,
    look_angle_for_incidence,
    orbit_states,
    propagate_orbit,
    slant_to_ground,
    zero_doppler_ground_point,
    zero_doppler_solve,
)

ALTITUDE = 500e3


@pytest.fixture
def flat_state():
    return StateVector(time=0.0, position=[0.0, 0.0, ALTITUDE], velocity=[7000.0, 0.0, 0.0])


def _sign_change(orbit, target, times):
    """Index of the first interval where the Doppler dot product changes sign"""
    pos, vel = orbit_states(orbit, times)
    dot = np.sum(vel * (target - pos), axis=-1)
    return int(np.flatnonzero(np.sign(dot[:-1]) != np.sign(dot[1:]))[0])


class TestFlatEarth:
    def test_slant_to_ground_is_pythagorean(self, flat_state):
        geom = AcquisitionGeometry(orbit=OrbitModel())
        flat = EarthEllipsoid.flat()
        for ground in (100e3, 250e3, 400e3):
            slant = math.hypot(ground, ALTITUDE)
            assert slant_to_ground(slant, geom, flat_state, flat) == pytest.approx(ground, rel=1e-9)
            assert ground_to_slant(ground, geom, flat_state, flat) == pytest.approx(slant, rel=1e-9)

    def test_slant_range_below_altitude_has_no_ground_point(self, flat_state):
        geom = AcquisitionGeometry(orbit=OrbitModel())
        with pytest.raises(NoIntersectionError):
            slant_to_ground(ALTITUDE - 10.0, geom, flat_state, EarthEllipsoid.flat())

    def test_right_looking_point_lies_on_the_surface(self, flat_state):
        point = zero_doppler_ground_point(flat_state, 600e3, LookSide.RIGHT, EarthEllipsoid.flat())
        assert point[2] == pytest.approx(0.0, abs=1e-6)
        assert point[0] == pytest.approx(0.0, abs=1e-6)
        # velocity along +x with the surface below puts the right side at -y
        assert point[1] < 0
        assert np.linalg.norm(point - flat_state.position) == pytest.approx(600e3, rel=1e-9)

    def test_incidence_matches_flat_geometry(self, flat_state):
        ground = 300e3
        target = np.array([0.0, -ground, 0.0])
        angle = incidence_angle(flat_state, target, EarthEllipsoid.flat())
        assert angle == pytest.approx(math.degrees(math.atan2(ground, ALTITUDE)), abs=1e-9)

    def test_target_above_sensor_is_rejected(self, flat_state):
        with pytest.raises(TargetAboveSensorError):
            incidence_angle(flat_state, np.array([0.0, -1e3, ALTITUDE + 1e3]), EarthEllipsoid.flat())


class TestOrbit:
    def test_circular_orbit_keeps_its_radius(self):
        orbit = OrbitModel(ellipsoid=EarthEllipsoid.sphere(6371e3))
        for t in (0.0, 100.0, 1000.0):
            state = propagate_orbit(orbit, t)
            assert np.linalg.norm(state.position) == pytest.approx(orbit.radius, rel=1e-9)

    def test_orbit_rejects_flat_earth(self):
        with pytest.raises(ValidationError):
            OrbitModel(ellipsoid=EarthEllipsoid.flat())

    def test_orbit_rejects_bad_inclination(self):
        with pytest.raises(ValidationError):
            OrbitModel(inclination=190.0)


class TestZeroDoppler:
    def test_recovers_the_crossing_time(self):
        orbit = OrbitModel()
        state = propagate_orbit(orbit, 2.0)
        target = zero_doppler_ground_point(state, 650e3, LookSide.RIGHT, orbit.ellipsoid)
        solution = zero_doppler_solve(orbit, target, (0.0, 4.0))
        assert solution.azimuth_time == pytest.approx(2.0, abs=1e-6)
        assert solution.slant_range == pytest.approx(650e3, abs=1e-2)

    def test_matches_a_brute_force_scan(self):
        orbit = OrbitModel()
        rng = np.random.default_rng(11)
        for t_true, slant in zip(rng.uniform(0.0, 100.0, 100), rng.uniform(600e3, 720e3, 100)):
            target = zero_doppler_ground_point(propagate_orbit(orbit, t_true), slant, LookSide.RIGHT,
                                               orbit.ellipsoid)
            solution = zero_doppler_solve(orbit, target, (t_true - 2.0, t_true + 2.0))

            coarse = np.linspace(t_true - 2.0, t_true + 2.0, 4001)
            k = _sign_change(orbit, target, coarse)
            fine = np.linspace(coarse[k], coarse[k + 1], 1001)
            j = _sign_change(orbit, target, fine)
            assert fine[j] - 1e-6 <= solution.azimuth_time <= fine[j + 1] + 1e-6
            assert solution.slant_range == pytest.approx(slant, abs=1e-3)

    def test_window_without_crossing(self):
        orbit = OrbitModel()
        target = zero_doppler_ground_point(propagate_orbit(orbit, 2.0), 650e3, LookSide.RIGHT, orbit.ellipsoid)
        with pytest.raises(NoCrossingError):
            zero_doppler_solve(orbit, target, (5.0, 8.0))

    def test_reversed_window_is_invalid(self):
        orbit = OrbitModel()
        with pytest.raises(ValidationError):
            zero_doppler_solve(orbit, np.zeros(3), (4.0, 0.0))


class TestLookGeometry:
    def test_look_angle_reaches_requested_incidence(self):
        orbit = OrbitModel()
        state = propagate_orbit(orbit, 0.0)
        rng, look = look_angle_for_incidence(state, 25.0, LookSide.RIGHT, orbit.ellipsoid)
        point = zero_doppler_ground_point(state, rng, LookSide.RIGHT, orbit.ellipsoid)
        assert incidence_angle(state, point, orbit.ellipsoid) == pytest.approx(25.0, abs=1e-4)
        # Earth curvature makes the incidence larger than the look angle
        assert 0 < math.degrees(look) < 25.0

    def test_ground_and_slant_range_round_trip_on_the_ellipsoid(self):
        orbit = OrbitModel()
        geom = AcquisitionGeometry(orbit=orbit)
        state = propagate_orbit(orbit, 0.0)
        for slant in np.linspace(600e3, 720e3, 7):
            ground = slant_to_ground(slant, geom, state, orbit.ellipsoid)
            assert ground_to_slant(ground, geom, state, orbit.ellipsoid) == pytest.approx(slant, abs=1e-3)

    def test_spotlight_incidence_limits(self):
        with pytest.raises(ValidationError):
            AcquisitionGeometry(mode=AcquisitionMode.SPOTLIGHT, center_incidence=15.0)
        AcquisitionGeometry(mode=AcquisitionMode.SPOTLIGHT, center_incidence=30.0)
