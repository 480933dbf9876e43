"""
Earth and orbit geometry
Circular two-body orbits in an Earth-fixed frame, zero-Doppler solving,
incidence angles and slant/ground range projection on the WGS84 ellipsoid.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Tuple, Union

import numpy as np
from scipy import optimize

from ..core.exceptions import (
    AmbiguousCrossingError,
    NoCrossingError,
    NoIntersectionError,
    TargetAboveSensorError,
    ValidationError,
)

logger = logging.getLogger(__name__)

WGS84_SEMI_MAJOR_AXIS = 6378137.0
WGS84_FLATTENING = 1.0 / 298.257223563
WGS84_ROTATION_RATE = 7.2921150e-5
EARTH_GM = 3.986004418e14

ArrayLike = Union[float, np.ndarray]


class LookSide(str, Enum):
    LEFT = "LEFT"
    RIGHT = "RIGHT"


class AcquisitionMode(str, Enum):
    STRIPMAP = "STRIPMAP"
    SPOTLIGHT = "SPOTLIGHT"


INCIDENCE_LIMITS = {
    AcquisitionMode.STRIPMAP: (10.0, 30.0),
    AcquisitionMode.SPOTLIGHT: (20.0, 35.0),
}


@dataclass(frozen=True)
class EarthEllipsoid:
    """Reference ellipsoid. An infinite semi-major axis models a flat Earth (z = 0 plane)."""
    semi_major_axis: float = WGS84_SEMI_MAJOR_AXIS
    flattening: float = WGS84_FLATTENING
    rotation_rate: float = WGS84_ROTATION_RATE

    def __post_init__(self) -> None:
        if not self.semi_major_axis > 0:
            raise ValidationError("semi_major_axis must be positive", field="semi_major_axis")
        if not 0.0 <= self.flattening < 1.0:
            raise ValidationError("flattening must be in [0, 1)", field="flattening")

    @classmethod
    def flat(cls) -> "EarthEllipsoid":
        return cls(semi_major_axis=math.inf, flattening=0.0, rotation_rate=0.0)

    @classmethod
    def sphere(cls, radius: float, rotation_rate: float = 0.0) -> "EarthEllipsoid":
        return cls(semi_major_axis=radius, flattening=0.0, rotation_rate=rotation_rate)

    @property
    def is_flat(self) -> bool:
        return math.isinf(self.semi_major_axis)

    @property
    def semi_minor_axis(self) -> float:
        return self.semi_major_axis * (1.0 - self.flattening)

    def inflated_axes(self, height: float = 0.0) -> Tuple[float, float]:
        return self.semi_major_axis + height, self.semi_minor_axis + height

    def surface_normal(self, points: np.ndarray) -> np.ndarray:
        """Outward unit normal of the ellipsoid for points on or near its surface"""
        points = np.asarray(points, dtype=float)
        if self.is_flat:
            return np.broadcast_to(np.array([0.0, 0.0, 1.0]), points.shape).copy()
        a, b = self.semi_major_axis, self.semi_minor_axis
        grad = points / np.array([a * a, a * a, b * b])
        return grad / np.linalg.norm(grad, axis=-1, keepdims=True)


@dataclass(frozen=True)
class OrbitModel:
    """Circular orbit; angles in degrees at the boundary, radians inside"""
    height_at_equator: float = 570e3
    inclination: float = 97.69
    epoch: float = 0.0
    ascending_node: float = 0.0
    phase: float = 0.0
    ellipsoid: EarthEllipsoid = field(default_factory=EarthEllipsoid)
    gm: float = EARTH_GM

    def __post_init__(self) -> None:
        if not self.height_at_equator > 0:
            raise ValidationError("orbit height must be positive", field="height_at_equator")
        if not 0.0 <= self.inclination <= 180.0:
            raise ValidationError("inclination must be in [0, 180] degrees", field="inclination")
        if self.ellipsoid.is_flat:
            raise ValidationError("orbits need a finite ellipsoid", field="ellipsoid")

    @property
    def radius(self) -> float:
        return self.ellipsoid.semi_major_axis + self.height_at_equator

    @property
    def mean_motion(self) -> float:
        return math.sqrt(self.gm / self.radius ** 3)

    @property
    def orbital_speed(self) -> float:
        return math.sqrt(self.gm / self.radius)


@dataclass(frozen=True, eq=False)
class StateVector:
    time: float
    position: np.ndarray
    velocity: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float).reshape(3))
        object.__setattr__(self, "velocity", np.asarray(self.velocity, dtype=float).reshape(3))
        if not np.linalg.norm(self.velocity) > 0:
            raise ValidationError("state velocity must be non-zero", field="velocity")

    @property
    def speed(self) -> float:
        return float(np.linalg.norm(self.velocity))


@dataclass(frozen=True)
class AcquisitionGeometry:
    orbit: OrbitModel = field(default_factory=OrbitModel)
    look_side: LookSide = LookSide.RIGHT
    mode: AcquisitionMode = AcquisitionMode.STRIPMAP
    center_incidence: float = 25.0
    scene_height: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "look_side", LookSide(self.look_side))
        object.__setattr__(self, "mode", AcquisitionMode(self.mode))
        low, high = INCIDENCE_LIMITS[self.mode]
        if not low <= self.center_incidence <= high:
            raise ValidationError(
                f"{self.mode.value} center incidence {self.center_incidence} deg "
                f"outside [{low}, {high}]",
                field="center_incidence",
            )


@dataclass(frozen=True)
class ZeroDopplerSolution:
    azimuth_time: float
    slant_range: float


def orbit_states(orbit: OrbitModel, times: ArrayLike) -> Tuple[np.ndarray, np.ndarray]:
    """
    Vectorized Earth-fixed positions and velocities

    Args:
        orbit: Orbit model
        times: Scalar or array of times in seconds

    Returns:
        Tuple of (positions, velocities), each shaped times.shape + (3,)
    """
    t = np.asarray(times, dtype=float)
    dt = t - orbit.epoch
    n = orbit.mean_motion
    r = orbit.radius
    u = orbit.phase + n * dt

    inc = math.radians(orbit.inclination)
    ci, si = math.cos(inc), math.sin(inc)
    co, so = math.cos(orbit.ascending_node), math.sin(orbit.ascending_node)

    xp, yp = r * np.cos(u), r * np.sin(u)
    vxp, vyp = -r * n * np.sin(u), r * n * np.cos(u)

    xi = co * xp - so * ci * yp
    yi = so * xp + co * ci * yp
    zi = si * yp
    vxi = co * vxp - so * ci * vyp
    vyi = so * vxp + co * ci * vyp
    vzi = si * vyp

    omega = orbit.ellipsoid.rotation_rate
    theta = omega * dt
    ct, st = np.cos(theta), np.sin(theta)
    xe = ct * xi + st * yi
    ye = -st * xi + ct * yi
    vxe = ct * vxi + st * vyi + omega * ye
    vye = -st * vxi + ct * vyi - omega * xe

    positions = np.stack([xe, ye, zi], axis=-1)
    velocities = np.stack([vxe, vye, vzi], axis=-1)
    return positions, velocities


def propagate_orbit(orbit: OrbitModel, t: float) -> StateVector:
    """
    Platform state at time t

    Args:
        orbit: Orbit model
        t: Time in seconds (finite)

    Returns:
        Earth-fixed state vector
    """
    if not math.isfinite(t):
        raise ValidationError("propagation time must be finite", field="t")
    pos, vel = orbit_states(orbit, t)
    return StateVector(time=float(t), position=pos, velocity=vel)


def _doppler_dot(orbit: OrbitModel, target: np.ndarray, t: ArrayLike) -> ArrayLike:
    pos, vel = orbit_states(orbit, t)
    return np.sum(vel * (target - pos), axis=-1)


def zero_doppler_solve(
    orbit: OrbitModel,
    target: np.ndarray,
    search_window: Tuple[float, float],
    scan_step: float = 0.05,
) -> ZeroDopplerSolution:
    """
    Find the broadside crossing of a target

    Bracketing bisection (brentq) to 1e-6 s, then Newton refinement on the
    Doppler dot product.

    Args:
        orbit: Orbit model
        target: Earth-fixed target position (m)
        search_window: (start, stop) times bracketing one crossing
        scan_step: Coarse scan step used to count sign changes

    Returns:
        Zero-Doppler azimuth time and slant range

    Raises:
        NoCrossingError: If the dot product keeps its sign across the window
        AmbiguousCrossingError: If more than one crossing is found
    """
    target = np.asarray(target, dtype=float).reshape(3)
    t0, t1 = float(search_window[0]), float(search_window[1])
    if not t1 > t0:
        raise ValidationError("search window must have positive length", field="search_window")

    n_scan = max(65, int(math.ceil((t1 - t0) / scan_step)) + 1)
    grid = np.linspace(t0, t1, n_scan)
    values = _doppler_dot(orbit, target, grid)
    signs = np.sign(values)
    crossings = np.flatnonzero(signs[:-1] * signs[1:] <= 0)
    # an exact zero on a grid node shows up in two neighbouring intervals
    if crossings.size > 1:
        distinct = crossings[np.concatenate(([True], np.diff(crossings) > 1))]
    else:
        distinct = crossings
    if distinct.size == 0:
        raise NoCrossingError(
            f"no zero-Doppler crossing in [{t0}, {t1}] s for target {target.tolist()}"
        )
    if distinct.size > 1:
        raise AmbiguousCrossingError(
            f"{distinct.size} zero-Doppler crossings in [{t0}, {t1}] s"
        )

    k = int(distinct[0])
    a, b = grid[k], grid[k + 1]
    if values[k] == 0.0:
        t = a
    elif values[k + 1] == 0.0:
        t = b
    else:
        t = optimize.brentq(lambda x: float(_doppler_dot(orbit, target, x)), a, b, xtol=1e-6)

    step = 1e-4
    for _ in range(20):
        f = float(_doppler_dot(orbit, target, t))
        df = float(
            (_doppler_dot(orbit, target, t + step) - _doppler_dot(orbit, target, t - step))
            / (2.0 * step)
        )
        if df == 0.0:
            break
        delta = f / df
        t -= delta
        if abs(delta) < 1e-13 * max(1.0, abs(t)):
            break

    pos, vel = orbit_states(orbit, t)
    diff = target - pos
    residual = abs(float(np.dot(vel, diff)))
    bound = np.linalg.norm(vel) * np.linalg.norm(diff) * 1e-12
    if residual > bound:
        logger.debug(f"Zero-Doppler residual {residual:.3e} above {bound:.3e} at t={t:.9f}")
    return ZeroDopplerSolution(azimuth_time=float(t), slant_range=float(np.linalg.norm(diff)))


def incidence_angle(
    state: StateVector,
    target: np.ndarray,
    ellipsoid: EarthEllipsoid = EarthEllipsoid(),
) -> Union[float, np.ndarray]:
    """
    Angle between the local ellipsoid normal and the target-to-sensor line

    Args:
        state: Sensor state
        target: Earth-fixed target position(s), shape (3,) or (N, 3)
        ellipsoid: Reference ellipsoid

    Returns:
        Incidence angle(s) in degrees

    Raises:
        TargetAboveSensorError: If the sensor is at or below the target's horizon
    """
    target = np.asarray(target, dtype=float)
    los = state.position - target
    normal = ellipsoid.surface_normal(target)
    cos_inc = np.sum(normal * los, axis=-1) / np.linalg.norm(los, axis=-1)
    if np.any(cos_inc <= 0.0):
        raise TargetAboveSensorError("sensor is not above the target horizon")
    angle = np.degrees(np.arccos(np.clip(cos_inc, -1.0, 1.0)))
    return float(angle) if np.ndim(angle) == 0 else angle


class CrossTrackPlane:
    """
    Plane through the sensor perpendicular to its velocity (the zero-Doppler plane)

    Rays in the plane are parametrized by the angle psi from the in-plane
    nadir direction towards the look side.
    """

    def __init__(
        self,
        state: StateVector,
        look_side: LookSide,
        ellipsoid: EarthEllipsoid,
        height: float = 0.0,
    ):
        self.state = state
        self.ellipsoid = ellipsoid
        self.height = height
        self.sensor = state.position
        v_hat = state.velocity / np.linalg.norm(state.velocity)
        down = -ellipsoid.surface_normal(self.sensor)
        down = down - np.dot(down, v_hat) * v_hat
        self.nadir_dir = down / np.linalg.norm(down)
        if LookSide(look_side) == LookSide.RIGHT:
            look = np.cross(self.nadir_dir, v_hat)
        else:
            look = np.cross(v_hat, self.nadir_dir)
        self.look_dir = look / np.linalg.norm(look)
        if ellipsoid.is_flat:
            self._scale = None
        else:
            a, b = ellipsoid.inflated_axes(height)
            self._scale = np.array([1.0 / a, 1.0 / a, 1.0 / b])
        self._nadir_psi: float | None = None
        self._tangent_psi: float | None = None

    def direction(self, psi: ArrayLike) -> np.ndarray:
        psi = np.asarray(psi, dtype=float)
        return (np.cos(psi)[..., None] * self.nadir_dir
                + np.sin(psi)[..., None] * self.look_dir)

    def ray_distance(self, psi: ArrayLike) -> np.ndarray:
        """Distance along each ray to the first surface intersection (nan on a miss)"""
        u = self.direction(psi)
        if self._scale is None:
            uz = u[..., 2]
            with np.errstate(divide="ignore", invalid="ignore"):
                rho = (self.height - self.sensor[2]) / uz
            return np.where((uz < 0) & (rho > 0), rho, np.nan)
        s = self.sensor * self._scale
        us = u * self._scale
        qa = np.sum(us * us, axis=-1)
        qb = 2.0 * np.sum(us * s, axis=-1)
        qc = float(np.dot(s, s)) - 1.0
        disc = qb * qb - 4.0 * qa * qc
        with np.errstate(invalid="ignore"):
            root = np.sqrt(disc)
        q = -0.5 * (qb + np.sign(qb) * root)
        with np.errstate(divide="ignore", invalid="ignore"):
            r1 = q / qa
            r2 = qc / q
        near = np.where((r1 > 0) & ((r1 <= r2) | (r2 <= 0)), r1, r2)
        return np.where((disc >= 0) & (near > 0), near, np.nan)

    def point(self, psi: ArrayLike) -> np.ndarray:
        return self.sensor + self.ray_distance(psi)[..., None] * self.direction(psi)

    @property
    def nadir_psi(self) -> float:
        if self._nadir_psi is None:
            if self._scale is None:
                self._nadir_psi = float(
                    math.atan2(-self.look_dir[2], -self.nadir_dir[2])
                ) if self.nadir_dir[2] != 0 else 0.0
            else:
                res = optimize.minimize_scalar(
                    lambda p: float(self.ray_distance(p)),
                    bounds=(-0.05, 0.05),
                    method="bounded",
                    options={"xatol": 1e-12},
                )
                self._nadir_psi = float(res.x)
        return self._nadir_psi

    @property
    def altitude(self) -> float:
        return float(self.ray_distance(self.nadir_psi))

    @property
    def tangent_psi(self) -> float:
        """Largest look-side angle that still hits the surface"""
        if self._tangent_psi is None:
            lo, hi = self.nadir_psi, math.pi / 2
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                if np.isnan(self.ray_distance(mid)):
                    hi = mid
                else:
                    lo = mid
                if hi - lo < 1e-13:
                    break
            self._tangent_psi = lo
        return self._tangent_psi

    def psi_for_range(self, slant_range: ArrayLike, tol: float = 1e-6, max_iter: int = 50) -> np.ndarray:
        """
        Look-side ray angle whose surface intersection lies at the given slant range

        Newton iteration on the in-plane ellipsoid equation, started from the
        spherical law-of-cosines solution.

        Raises:
            NoIntersectionError: If the range sphere misses the surface
        """
        rng = np.atleast_1d(np.asarray(slant_range, dtype=float))
        h = self.altitude
        if np.any(rng < h - tol):
            raise NoIntersectionError(
                f"slant range {float(rng.min()):.3f} m below sensor altitude {h:.3f} m"
            )
        if self._scale is None:
            psi = self.nadir_psi + np.arccos(np.clip(h / rng, -1.0, 1.0))
            return psi

        r_max = float(self.ray_distance(self.tangent_psi - 1e-12))
        if np.any(rng > r_max):
            raise NoIntersectionError(
                f"slant range {float(rng.max()):.3f} m beyond the horizon range {r_max:.3f} m"
            )
        r_s = float(np.linalg.norm(self.sensor))
        rho_loc = r_s - h
        cos_psi = np.clip((r_s ** 2 + rng ** 2 - rho_loc ** 2) / (2.0 * r_s * rng), -1.0, 1.0)
        psi = self.nadir_psi + np.arccos(cos_psi)

        s = self.sensor * self._scale
        n_s = self.nadir_dir * self._scale
        c_s = self.look_dir * self._scale
        nn, cc, nc = np.dot(n_s, n_s), np.dot(c_s, c_s), np.dot(n_s, c_s)
        sn, sc, ss = np.dot(s, n_s), np.dot(s, c_s), np.dot(s, s)
        for _ in range(max_iter):
            cp, sp = np.cos(psi), np.sin(psi)
            g = (ss + rng ** 2 * (cp * cp * nn + 2 * sp * cp * nc + sp * sp * cc)
                 + 2 * rng * (cp * sn + sp * sc) - 1.0)
            dg = (rng ** 2 * (2 * sp * cp * (cc - nn) + 2 * (cp * cp - sp * sp) * nc)
                  + 2 * rng * (-sp * sn + cp * sc))
            step = g / dg
            psi = psi - step
            if np.all(np.abs(step) * rng < tol * 1e-3):
                break
        psi = np.clip(psi, self.nadir_psi, self.tangent_psi)
        return psi

    def arc_length(self, psi: float, samples: int = 1025) -> float:
        """Surface arc length from the in-plane nadir point to the ray at psi"""
        if self._scale is None:
            p0 = self.point(self.nadir_psi)
            p1 = self.point(psi)
            return float(np.linalg.norm(p1 - p0))
        grid = np.linspace(self.nadir_psi, psi, samples)
        pts = self.point(grid)
        return float(np.sum(np.linalg.norm(np.diff(pts, axis=0), axis=-1)))


def zero_doppler_ground_point(
    state: StateVector,
    slant_range: ArrayLike,
    look_side: LookSide,
    ellipsoid: EarthEllipsoid = EarthEllipsoid(),
    height: float = 0.0,
) -> np.ndarray:
    """
    Surface point(s) at the given slant range(s) in the sensor's zero-Doppler plane

    Args:
        state: Sensor state at the zero-Doppler time
        slant_range: Slant range(s) in meters
        look_side: Look side
        ellipsoid: Reference ellipsoid
        height: Surface height above the ellipsoid

    Returns:
        Earth-fixed point(s), shape (3,) for scalar input else (N, 3)
    """
    plane = CrossTrackPlane(state, look_side, ellipsoid, height)
    rng = np.asarray(slant_range, dtype=float)
    psi = plane.psi_for_range(rng)
    pts = state.position + np.atleast_1d(rng)[:, None] * plane.direction(psi)
    return pts[0] if rng.ndim == 0 else pts


def slant_to_ground(
    slant_range: float,
    geom: AcquisitionGeometry,
    ref_state: StateVector,
    ellipsoid: EarthEllipsoid = EarthEllipsoid(),
) -> float:
    """
    Ground range (surface arc length from the sub-satellite point) for a slant range

    Args:
        slant_range: Slant range in meters
        geom: Acquisition geometry (look side, scene height)
        ref_state: Sensor state defining the zero-Doppler plane
        ellipsoid: Reference ellipsoid

    Returns:
        Ground range in meters

    Raises:
        NoIntersectionError: If the range sphere misses the surface
    """
    plane = CrossTrackPlane(ref_state, geom.look_side, ellipsoid, geom.scene_height)
    if ellipsoid.is_flat:
        h = plane.altitude
        if slant_range < h - 1e-6:
            raise NoIntersectionError(f"slant range {slant_range} m below altitude {h} m")
        return float(math.sqrt(max(slant_range ** 2 - h ** 2, 0.0)))
    psi = float(plane.psi_for_range(slant_range)[0])
    return plane.arc_length(psi)


def ground_to_slant(
    ground_range: float,
    geom: AcquisitionGeometry,
    ref_state: StateVector,
    ellipsoid: EarthEllipsoid = EarthEllipsoid(),
) -> float:
    """Inverse of slant_to_ground"""
    plane = CrossTrackPlane(ref_state, geom.look_side, ellipsoid, geom.scene_height)
    if ellipsoid.is_flat:
        return float(math.hypot(ground_range, plane.altitude))
    if ground_range <= 0.0:
        return plane.altitude
    psi_hi = plane.tangent_psi - 1e-9
    if plane.arc_length(psi_hi) < ground_range:
        raise NoIntersectionError(f"ground range {ground_range} m beyond the horizon")
    psi = optimize.brentq(
        lambda p: plane.arc_length(p) - ground_range, plane.nadir_psi, psi_hi, xtol=1e-14
    )
    return float(plane.ray_distance(psi))


def look_angle_for_incidence(
    state: StateVector,
    incidence: float,
    look_side: LookSide,
    ellipsoid: EarthEllipsoid = EarthEllipsoid(),
    height: float = 0.0,
) -> Tuple[float, float]:
    """
    Slant range and in-plane look angle (rad from nadir) that see the surface at an incidence

    Returns:
        Tuple of (slant_range, look_angle)
    """
    plane = CrossTrackPlane(state, look_side, ellipsoid, height)
    h = plane.altitude

    def residual(rng: float) -> float:
        psi = plane.psi_for_range(rng)
        pt = state.position + rng * plane.direction(psi)[0]
        return float(incidence_angle(state, pt, ellipsoid)) - incidence

    r_hi = float(plane.ray_distance(plane.tangent_psi - 1e-6)) if not ellipsoid.is_flat else h * 20
    rng = optimize.brentq(residual, h * (1 + 1e-9) + 1e-3, r_hi * (1 - 1e-9), xtol=1e-6)
    psi = float(plane.psi_for_range(rng)[0]) - plane.nadir_psi
    return float(rng), psi


def ground_velocity(
    orbit: OrbitModel,
    t: float,
    slant_range: float,
    look_side: LookSide,
    height: float = 0.0,
    dt: float = 0.05,
) -> float:
    """Speed of the zero-Doppler footprint point on the surface"""
    pts = []
    for tt in (t - dt, t + dt):
        st = propagate_orbit(orbit, tt)
        pts.append(zero_doppler_ground_point(st, slant_range, look_side, orbit.ellipsoid, height))
    return float(np.linalg.norm(pts[1] - pts[0]) / (2 * dt))


def effective_velocity(
    orbit: OrbitModel,
    target: np.ndarray,
    t0: float,
    half_span: float,
    samples: int = 201,
) -> Tuple[float, float]:
    """
    Fit R(t)^2 = R0^2 + Vr^2 (t - t0)^2 over an aperture

    Returns:
        Tuple of (effective velocity, fitted closest-approach range)
    """
    times = np.linspace(t0 - half_span, t0 + half_span, samples)
    pos, _ = orbit_states(orbit, times)
    r2 = np.sum((pos - np.asarray(target)) ** 2, axis=-1)
    slope, intercept = np.polyfit((times - t0) ** 2, r2, 1)
    return float(math.sqrt(slope)), float(math.sqrt(intercept))
