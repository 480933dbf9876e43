"""
Raw echo simulation for point targets
Stop-and-hop echoes with a separable sinc antenna pattern, thermal noise
from a counter-based generator, Stripmap (fixed beam) and Spotlight
(continuously re-pointed beam) collections.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import lru_cache
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import constants

from ..config.config import get_config
from ..core.exceptions import BeamMissError, TargetOutOfWindowError, ValidationError
from .geometry import (
    AcquisitionGeometry,
    AcquisitionMode,
    StateVector,
    ground_velocity,
    incidence_angle,
    look_angle_for_incidence,
    orbit_states,
    propagate_orbit,
    zero_doppler_ground_point,
)
from .signal import SPEED_OF_LIGHT, ChirpParams

logger = logging.getLogger(__name__)

BOLTZMANN = constants.k
# uncalibrated digital scale between received volts and stored counts
DIGITAL_SCALE = 1e6
DEFAULT_CHUNK_PULSES = 256
WINDOW_GUARD_SAMPLES = 64


class SteeringMode(str, Enum):
    FIXED = "FIXED"
    SPOT = "SPOT"


@dataclass(frozen=True)
class SteeringLaw:
    """Azimuth beam steering. SPOT without spot_center points at the scene center."""
    mode: SteeringMode = SteeringMode.FIXED
    spot_center: Optional[Tuple[float, float, float]] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", SteeringMode(self.mode))
        if self.spot_center is not None:
            if self.mode != SteeringMode.SPOT:
                raise ValidationError("spot_center only applies to SPOT steering", field="spot_center")
            object.__setattr__(self, "spot_center", tuple(float(x) for x in self.spot_center))


@dataclass(frozen=True, eq=False)
class PointTarget:
    position: np.ndarray
    rcs: float
    phase_offset: float = 0.0
    name: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float).reshape(3))
        if not self.rcs > 0:
            raise ValidationError(f"target rcs must be positive, got {self.rcs}", field="rcs")


@dataclass(frozen=True)
class AntennaModel:
    """
    Planar antenna

    boresight_elevation is the look angle from nadir in degrees; None points
    the beam at the scene center incidence. pointing_error is added to the
    transmitted beam only (processing assumes the nominal boresight).
    """
    length_azimuth: float = 3.2
    height_elevation: float = 0.4
    boresight_elevation: Optional[float] = None
    peak_gain: Optional[float] = None
    pointing_error: float = 0.0

    def __post_init__(self) -> None:
        if not (self.length_azimuth > 0 and self.height_elevation > 0):
            raise ValidationError("antenna dimensions must be positive", field="antenna")

    def peak_gain_db(self, wavelength: float) -> float:
        if self.peak_gain is not None:
            return float(self.peak_gain)
        aperture = 4.0 * math.pi * self.length_azimuth * self.height_elevation / wavelength ** 2
        return 10.0 * math.log10(aperture)


@dataclass(frozen=True)
class NoiseSettings:
    enabled: bool = False
    noise_figure_db: float = 3.0
    system_temperature: float = 290.0
    losses_db: float = 1.0


@dataclass(frozen=True)
class PerturbationBudget:
    """One-sigma error contributors drawn per scene in a reflector campaign"""
    elevation_pointing_std: float = 0.0
    rcs_std_db: float = 0.0
    chirp_droop_db: float = 0.0
    gain_drift_std_db: float = 0.0

    def draw(self, rng: np.random.Generator, count: int) -> Dict[str, np.ndarray]:
        return {
            "pointing_error": rng.normal(0.0, self.elevation_pointing_std, count),
            "rcs_error_db": rng.normal(0.0, self.rcs_std_db, count),
            "gain_offset_db": rng.normal(0.0, self.gain_drift_std_db, count),
        }


@dataclass(frozen=True)
class CollectionPlan:
    """
    Everything needed to simulate one data take

    range_window is (start time in seconds, sample count); None sizes the
    window automatically around the echoes.
    """
    geom: AcquisitionGeometry
    chirp: ChirpParams
    prf: float
    start: float
    stop: float
    steering: SteeringLaw = field(default_factory=SteeringLaw)
    tx_power: float = 4000.0
    rx_gain: float = 0.0
    duty_cycle: Optional[float] = None
    antenna: AntennaModel = field(default_factory=AntennaModel)
    noise: NoiseSettings = field(default_factory=NoiseSettings)
    range_window: Optional[Tuple[float, int]] = None
    gain_offset_db: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if not 2e3 <= self.prf <= 10e3:
            raise ValidationError(f"prf {self.prf} Hz outside [2e3, 10e3]", field="prf")
        if not self.stop > self.start:
            raise ValidationError("collection stop must follow start", field="stop")
        if not 0.0 < self.effective_duty_cycle <= 0.5:
            raise ValidationError(
                f"duty cycle {self.effective_duty_cycle:.3f} outside (0, 0.5]", field="duty_cycle"
            )
        if self.chirp.pulse_duration * self.prf > 0.5:
            raise ValidationError("pulse longer than half the PRI", field="chirp")
        if not self.tx_power > 0:
            raise ValidationError("tx_power must be positive", field="tx_power")
        expected = SteeringMode.FIXED if self.geom.mode == AcquisitionMode.STRIPMAP else SteeringMode.SPOT
        if self.steering.mode != expected:
            raise ValidationError(
                f"{self.geom.mode.value} collections use {expected.value} steering", field="steering"
            )

    @property
    def effective_duty_cycle(self) -> float:
        if self.duty_cycle is not None:
            return self.duty_cycle
        return self.chirp.pulse_duration * self.prf

    @property
    def average_power(self) -> float:
        return self.tx_power * self.effective_duty_cycle

    @property
    def wavelength(self) -> float:
        return self.chirp.wavelength

    @property
    def num_pulses(self) -> int:
        return int(math.floor((self.stop - self.start) * self.prf + 1e-9)) + 1

    @property
    def pulse_times(self) -> np.ndarray:
        return self.start + np.arange(self.num_pulses) / self.prf

    @property
    def center_time(self) -> float:
        return 0.5 * (self.start + self.stop)

    @property
    def peak_gain_linear(self) -> float:
        return 10.0 ** (self.antenna.peak_gain_db(self.wavelength) / 10.0)

    @property
    def thermal_noise_power(self) -> float:
        """Noise power per complex sample in digital units"""
        n = self.noise
        return (BOLTZMANN * n.system_temperature * 10.0 ** (n.noise_figure_db / 10.0)
                * self.chirp.sample_rate * 10.0 ** (self.rx_gain / 10.0) * DIGITAL_SCALE ** 2)

    def with_updates(self, **changes: Any) -> "CollectionPlan":
        return replace(self, **changes)


@dataclass(frozen=True, eq=False)
class SceneReference:
    """Scene-center geometry at the middle of the collection"""
    time: float
    state: StateVector
    slant_range: float
    look_angle: float
    center: np.ndarray
    incidence: float
    ground_velocity: float


@lru_cache(maxsize=64)
def scene_reference(plan: CollectionPlan) -> SceneReference:
    geom = plan.geom
    ellipsoid = geom.orbit.ellipsoid
    state = propagate_orbit(geom.orbit, plan.center_time)
    rng, look = look_angle_for_incidence(
        state, geom.center_incidence, geom.look_side, ellipsoid, geom.scene_height
    )
    center = zero_doppler_ground_point(state, rng, geom.look_side, ellipsoid, geom.scene_height)
    v_g = ground_velocity(geom.orbit, plan.center_time, rng, geom.look_side, geom.scene_height)
    return SceneReference(
        time=plan.center_time,
        state=state,
        slant_range=rng,
        look_angle=look,
        center=center,
        incidence=float(incidence_angle(state, center, ellipsoid)),
        ground_velocity=v_g,
    )


def boresight_look_angle(plan: CollectionPlan, include_error: bool = True) -> float:
    """Elevation boresight as a look angle from nadir in radians"""
    if plan.antenna.boresight_elevation is not None:
        look = math.radians(plan.antenna.boresight_elevation)
    else:
        look = scene_reference(plan).look_angle
    if include_error:
        look += math.radians(plan.antenna.pointing_error)
    return look


@dataclass(eq=False)
class RawDataMatrix:
    samples: np.ndarray
    pulse_times: np.ndarray
    range_window_start: float
    plan: CollectionPlan
    targets: Tuple[PointTarget, ...] = ()
    noise_power: float = 0.0
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.samples.shape[0] != self.pulse_times.size:
            raise ValidationError("one row per pulse required", field="samples")
        if self.pulse_times.size > 1 and not np.all(np.diff(self.pulse_times) > 0):
            raise ValidationError("pulse times must increase", field="pulse_times")

    @property
    def num_pulses(self) -> int:
        return int(self.samples.shape[0])

    @property
    def num_samples(self) -> int:
        return int(self.samples.shape[1])

    @property
    def fast_times(self) -> np.ndarray:
        return self.range_window_start + np.arange(self.num_samples) / self.plan.chirp.sample_rate

    @property
    def slant_range_axis(self) -> np.ndarray:
        return 0.5 * SPEED_OF_LIGHT * self.fast_times


def antenna_gain_two_way(
    antenna: AntennaModel, az_off: np.ndarray, el_off: np.ndarray, wavelength: float
) -> np.ndarray:
    """
    Separable two-way power pattern normalized to 1 at boresight

    Args:
        antenna: Antenna dimensions
        az_off: Azimuth offset angle(s) in radians
        el_off: Elevation offset angle(s) in radians
        wavelength: Carrier wavelength in meters

    Returns:
        sinc^4(L sin(az)/lambda) * sinc^4(H sin(el)/lambda)
    """
    az = np.sinc(antenna.length_azimuth * np.sin(az_off) / wavelength)
    el = np.sinc(antenna.height_elevation * np.sin(el_off) / wavelength)
    return (az * az) ** 2 * (el * el) ** 2


def azimuth_gain_two_way(antenna: AntennaModel, doppler: np.ndarray, velocity: float) -> np.ndarray:
    """Two-way azimuth pattern as a function of Doppler frequency (sin(az) = lambda f / 2v)"""
    x = np.sinc(antenna.length_azimuth * np.asarray(doppler) / (2.0 * velocity))
    return (x * x) ** 2


def beam_offsets(
    plan: CollectionPlan,
    positions: np.ndarray,
    velocities: np.ndarray,
    target: np.ndarray,
    include_error: bool = True,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Slant range, azimuth and elevation off-boresight angles of a target per pulse

    Returns:
        Tuple of (ranges, az_off, el_off), each shaped (num_pulses,)
    """
    ellipsoid = plan.geom.orbit.ellipsoid
    los = target - positions
    ranges = np.linalg.norm(los, axis=-1)
    los_hat = los / ranges[:, None]
    v_hat = velocities / np.linalg.norm(velocities, axis=-1, keepdims=True)
    down = -ellipsoid.surface_normal(positions)
    down = down - np.sum(down * v_hat, axis=-1, keepdims=True) * v_hat
    down = down / np.linalg.norm(down, axis=-1, keepdims=True)
    if plan.geom.look_side.value == "RIGHT":
        side = np.cross(down, v_hat)
    else:
        side = np.cross(v_hat, down)

    along = np.clip(np.sum(los_hat * v_hat, axis=-1), -1.0, 1.0)
    az_off = np.arcsin(along)
    if plan.steering.mode == SteeringMode.SPOT:
        spot = plan.steering.spot_center
        spot = scene_reference(plan).center if spot is None else np.asarray(spot)
        spot_los = spot - positions
        spot_los = spot_los / np.linalg.norm(spot_los, axis=-1, keepdims=True)
        az_off = az_off - np.arcsin(np.clip(np.sum(spot_los * v_hat, axis=-1), -1.0, 1.0))

    look = np.arctan2(np.sum(los_hat * side, axis=-1), np.sum(los_hat * down, axis=-1))
    el_off = look - boresight_look_angle(plan, include_error)
    return ranges, az_off, el_off


def echo_amplitude(plan: CollectionPlan, rcs: float, ranges: np.ndarray, gain: np.ndarray) -> np.ndarray:
    """Received echo amplitude in digital units (radar equation with R^4 spreading)"""
    lam = plan.wavelength
    g0 = plan.peak_gain_linear
    losses = 10.0 ** (plan.noise.losses_db / 10.0)
    scale = 10.0 ** ((plan.rx_gain + plan.gain_offset_db) / 10.0) * DIGITAL_SCALE ** 2
    power = (plan.tx_power * g0 * g0 * gain * lam * lam * rcs
             / ((4.0 * math.pi) ** 3 * ranges ** 4 * losses)) * scale
    return np.sqrt(power)


def _auto_range_window(plan: CollectionPlan, delays: List[np.ndarray]) -> Tuple[float, int]:
    fs = plan.chirp.sample_rate
    half_pulse = 0.5 * plan.chirp.pulse_duration
    guard = WINDOW_GUARD_SAMPLES / fs
    if delays:
        lo = min(float(d.min()) for d in delays)
        hi = max(float(d.max()) for d in delays)
    else:
        lo = hi = 2.0 * scene_reference(plan).slant_range / SPEED_OF_LIGHT
    start = lo - half_pulse - guard
    count = int(math.ceil((hi - lo + 2 * half_pulse + 2 * guard) * fs))
    count += count % 2
    return start, count


def _echo_block(
    plan: CollectionPlan,
    fast: np.ndarray,
    ranges: np.ndarray,
    amplitude: np.ndarray,
    phase_offset: float,
) -> np.ndarray:
    chirp = plan.chirp
    fs = chirp.sample_rate
    m = chirp.num_samples
    lo, hi = -(m // 2) / fs, (m - m // 2) / fs
    u = fast[None, :] - (2.0 * ranges / SPEED_OF_LIGHT)[:, None]
    inside = (u >= lo) & (u < hi)
    phase = np.pi * chirp.chirp_rate * u * u
    block = np.where(inside, np.exp(1j * phase), 0.0)
    if chirp.droop_db > 0:
        edge = 10.0 ** (-chirp.droop_db / 20.0)
        a0 = 0.5 * (1.0 + edge)
        block = block * (a0 + (1.0 - a0) * np.cos(2.0 * np.pi * u / (m / fs)))
    carrier = np.exp(-1j * (4.0 * np.pi * ranges / plan.wavelength - phase_offset))
    return block * (amplitude * carrier)[:, None]


def simulate_raw(
    targets: Sequence[PointTarget],
    plan: CollectionPlan,
    threads: Optional[int] = None,
    chunk_pulses: int = DEFAULT_CHUNK_PULSES,
) -> RawDataMatrix:
    """
    Synthesize the raw echo matrix of a collection

    Args:
        targets: Point targets
        plan: Collection plan
        threads: Worker threads over pulse chunks (result does not depend on it)
        chunk_pulses: Pulses per work item

    Returns:
        Raw matrix [pulse x range sample], thermal noise added when plan.noise.enabled

    Raises:
        TargetOutOfWindowError: If an echo leaves the configured range window
        BeamMissError: If a target never enters the -3 dB footprint
    """
    if threads is None:
        threads = get_config().threads
    times = plan.pulse_times
    positions, velocities = orbit_states(plan.geom.orbit, times)
    lam = plan.wavelength

    per_target = []
    for tgt in targets:
        ranges, az_off, el_off = beam_offsets(plan, positions, velocities, tgt.position)
        gain = antenna_gain_two_way(plan.antenna, az_off, el_off, lam)
        if float(gain.max()) < 0.25:
            raise BeamMissError(
                f"target {tgt.name or tgt.position.tolist()} never inside the -3 dB footprint "
                f"(best two-way gain {10 * math.log10(max(float(gain.max()), 1e-30)):.1f} dB)"
            )
        per_target.append((tgt, ranges, echo_amplitude(plan, tgt.rcs, ranges, gain)))

    delays = [2.0 * r / SPEED_OF_LIGHT for _, r, _ in per_target]
    window = plan.range_window or _auto_range_window(plan, delays)
    start, count = float(window[0]), int(window[1])
    fs = plan.chirp.sample_rate
    end = start + count / fs
    half_pulse = 0.5 * plan.chirp.num_samples / fs
    for (tgt, _, _), d in zip(per_target, delays):
        if d.min() - half_pulse < start or d.max() + half_pulse > end:
            raise TargetOutOfWindowError(
                f"echo of {tgt.name or tgt.position.tolist()} leaves range window "
                f"[{start:.9e}, {end:.9e}] s"
            )

    samples = np.zeros((times.size, count), dtype=np.complex128)
    fast = start + np.arange(count) / fs

    def work(lo: int) -> None:
        hi = min(lo + chunk_pulses, times.size)
        for tgt, ranges, amplitude in per_target:
            samples[lo:hi] += _echo_block(plan, fast, ranges[lo:hi], amplitude[lo:hi], tgt.phase_offset)

    chunks = range(0, times.size, chunk_pulses)
    if threads > 1 and per_target:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, chunks))
    else:
        for lo in chunks:
            work(lo)

    logger.info(
        f"Simulated {times.size} pulses x {count} samples for {len(per_target)} targets "
        f"({plan.geom.mode.value})"
    )
    raw = RawDataMatrix(
        samples=samples,
        pulse_times=times,
        range_window_start=start,
        plan=plan,
        targets=tuple(targets),
        metadata={
            "digital_scale": DIGITAL_SCALE,
            "peak_gain_db": plan.antenna.peak_gain_db(lam),
            "range_window": [start, count],
            "stop_and_hop": True,
        },
    )
    if plan.noise.enabled:
        raw = inject_noise(raw, plan.thermal_noise_power, seed=plan.seed, threads=threads)
    return raw


def _pulse_noise(seed: int, pulse_index: int, count: int, noise_power: float) -> np.ndarray:
    gen = np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, 0, pulse_index]))
    u = gen.random((2, count))
    radius = np.sqrt(-2.0 * np.log1p(-u[0]))
    return math.sqrt(noise_power / 2.0) * radius * np.exp(2j * np.pi * u[1])


def inject_noise(
    raw: RawDataMatrix,
    noise_power: float,
    seed: Optional[int] = None,
    threads: int = 1,
) -> RawDataMatrix:
    """
    Add circular complex white Gaussian noise

    Each pulse draws from its own Philox stream keyed by seed and counted by
    pulse index, so output is identical for any thread count.

    Args:
        raw: Input matrix (left unchanged)
        noise_power: Variance per complex sample (linear, >= 0)
        seed: Generator key; defaults to the plan seed
        threads: Worker threads

    Returns:
        New matrix with noise added
    """
    if noise_power < 0:
        raise ValidationError("noise_power must be non-negative", field="noise_power")
    seed = raw.plan.seed if seed is None else int(seed)
    samples = raw.samples.copy()
    if noise_power > 0:
        def work(i: int) -> None:
            samples[i] += _pulse_noise(seed, i, raw.num_samples, noise_power)

        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                list(pool.map(work, range(raw.num_pulses)))
        else:
            for i in range(raw.num_pulses):
                work(i)
    metadata = dict(raw.metadata)
    metadata["noise_seed"] = seed
    return RawDataMatrix(
        samples=samples,
        pulse_times=raw.pulse_times,
        range_window_start=raw.range_window_start,
        plan=raw.plan,
        targets=raw.targets,
        noise_power=raw.noise_power + noise_power,
        metadata=metadata,
    )


def stripmap_dwell(plan: CollectionPlan) -> float:
    """Azimuth -3 dB (two-way) illumination time of a scene-center target"""
    ref = scene_reference(plan)
    beamwidth = 0.6375 * plan.wavelength / plan.antenna.length_azimuth
    return beamwidth * ref.slant_range / ref.ground_velocity
