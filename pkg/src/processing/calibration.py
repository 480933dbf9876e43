"""
Radiometric calibration
Per-pixel gain compensation chain, absolute calibration constant from
point targets, noise-equivalent sigma zero and ambiguity ratios.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import fft, integrate

from ..core.exceptions import (
    NonInvertibleError,
    PatternOutOfDomainError,
    RegionContaminatedError,
    TooFewReflectorsError,
    ValidationError,
)
from ..core.models import CalibrationReport, ChipCalibration, ProductMetadata
from .focus import FocusConfig, FocusedImage, azimuth_bandwidth
from .geometry import (
    AcquisitionGeometry,
    AcquisitionMode,
    CrossTrackPlane,
    effective_velocity,
    incidence_angle,
    look_angle_for_incidence,
    propagate_orbit,
)
from .quality import RATIO_FLOOR_DB, IRFChip, integrated_energy
from .rawsim import (
    BOLTZMANN,
    AntennaModel,
    CollectionPlan,
    antenna_gain_two_way,
    azimuth_gain_two_way,
    boresight_look_angle,
    echo_amplitude,
    scene_reference,
)
from .signal import DEFAULT_CARRIER_FREQUENCY, SPEED_OF_LIGHT

logger = logging.getLogger(__name__)

REFERENCE_RANGE_BANDWIDTH = 300e6
REFERENCE_AZIMUTH_BANDWIDTH = 3100.0
PATTERN_DOMAIN_FLOOR = 1e-3
NESZ_FLOOR_DB = -60.0
AMBIGUITY_ORDERS = 5


class Correction(str, Enum):
    RANGE_SPREAD = "RANGE_SPREAD"
    ELEVATION_PATTERN = "ELEVATION_PATTERN"
    AZIMUTH_PATTERN_SPOT = "AZIMUTH_PATTERN_SPOT"
    BANDWIDTH_NORM = "BANDWIDTH_NORM"
    SENSOR_SETTINGS = "SENSOR_SETTINGS"


@dataclass(frozen=True)
class SensorSettings:
    receiver_gain: float = 0.0
    transmit_power: float = 4000.0
    duty_cycle: float = 0.25

    def __post_init__(self) -> None:
        if not (self.transmit_power > 0 and self.duty_cycle > 0):
            raise ValidationError("sensor settings must be positive", field="sensor_settings")

    @classmethod
    def from_plan(cls, plan: CollectionPlan) -> "SensorSettings":
        return cls(receiver_gain=plan.rx_gain, transmit_power=plan.tx_power,
                   duty_cycle=plan.effective_duty_cycle)


@dataclass(frozen=True)
class CompensationChain:
    """Ordered amplitude corrections and their reference values"""
    corrections: Tuple[Correction, ...] = tuple(Correction)
    reference_range: float = 600e3
    reference_settings: SensorSettings = field(default_factory=SensorSettings)
    reference_range_bandwidth: float = REFERENCE_RANGE_BANDWIDTH
    reference_azimuth_bandwidth: float = REFERENCE_AZIMUTH_BANDWIDTH

    def __post_init__(self) -> None:
        object.__setattr__(self, "corrections", tuple(Correction(c) for c in self.corrections))
        if len(set(self.corrections)) != len(self.corrections):
            raise ValidationError("corrections may appear once each", field="corrections")
        if not self.reference_range > 0:
            raise ValidationError("reference_range must be positive", field="reference_range")

    @classmethod
    def identity(cls) -> "CompensationChain":
        return cls(corrections=())


def _elevation_offsets(plan: CollectionPlan, ranges: np.ndarray) -> np.ndarray:
    ref = scene_reference(plan)
    geom = plan.geom
    plane = CrossTrackPlane(ref.state, geom.look_side, geom.orbit.ellipsoid, geom.scene_height)
    psi = plane.psi_for_range(ranges) - plane.nadir_psi
    return psi - boresight_look_angle(plan, include_error=False)


def correction_factors(
    img: FocusedImage, chain: CompensationChain, plan: CollectionPlan
) -> Dict[Correction, np.ndarray]:
    """
    Amplitude multiplier of every correction in the chain

    Each entry broadcasts against the image (row or column vectors, or scalars).

    Raises:
        PatternOutOfDomainError: If a pixel lies outside the characterized beam
    """
    ranges = img.slant_range_axis
    lam = plan.wavelength
    factors: Dict[Correction, np.ndarray] = {}
    for corr in chain.corrections:
        if corr == Correction.RANGE_SPREAD:
            value = ((ranges / chain.reference_range) ** 1.5)[None, :]
        elif corr == Correction.ELEVATION_PATTERN:
            el = _elevation_offsets(plan, ranges)
            gain = antenna_gain_two_way(plan.antenna, np.zeros_like(el), el, lam)
            if np.any(gain < PATTERN_DOMAIN_FLOOR):
                raise PatternOutOfDomainError(
                    f"elevation pattern below {10 * math.log10(PATTERN_DOMAIN_FLOOR):.0f} dB inside the image"
                )
            value = (1.0 / np.sqrt(gain))[None, :]
        elif corr == Correction.AZIMUTH_PATTERN_SPOT:
            if plan.geom.mode != AcquisitionMode.SPOTLIGHT:
                value = np.ones((1, 1))
            else:
                ref = scene_reference(plan)
                offset = ref.ground_velocity * (img.azimuth_time_axis - ref.time)
                az = offset[:, None] / ranges[None, :]
                gain = antenna_gain_two_way(plan.antenna, az, np.zeros_like(az), lam)
                if np.any(gain < PATTERN_DOMAIN_FLOOR):
                    raise PatternOutOfDomainError("azimuth pattern below the characterized domain")
                value = 1.0 / np.sqrt(gain)
        elif corr == Correction.BANDWIDTH_NORM:
            b_az = float(img.metadata.get("azimuth_bandwidth", img.config.processed_doppler_bandwidth))
            value = np.full((1, 1), math.sqrt(chain.reference_range_bandwidth / plan.chirp.bandwidth)
                            * math.sqrt(chain.reference_azimuth_bandwidth / b_az))
        else:
            ref_s = chain.reference_settings
            cur = SensorSettings.from_plan(plan)
            value = np.full((1, 1), math.sqrt(ref_s.transmit_power / cur.transmit_power)
                            * 10.0 ** ((ref_s.receiver_gain - cur.receiver_gain) / 20.0)
                            * (ref_s.duty_cycle / cur.duty_cycle))
        factors[corr] = np.asarray(value, dtype=float)
        logger.debug(f"{corr.value}: amplitude factor {float(np.min(value)):.4g} .. {float(np.max(value)):.4g}")
    return factors


def gain_surface(img: FocusedImage, chain: CompensationChain, plan: CollectionPlan) -> np.ndarray:
    """
    Product of all correction factors over the image grid

    Raises:
        NonInvertibleError: If any factor is non-positive or non-finite
    """
    surface = np.ones(img.pixels.shape)
    for factor in correction_factors(img, chain, plan).values():
        surface = surface * factor
    if not np.all(np.isfinite(surface)) or np.any(surface <= 0):
        raise NonInvertibleError("compensation surface is not strictly positive")
    return surface


def _with_pixels(img: FocusedImage, pixels: np.ndarray, compensations: List[str]) -> FocusedImage:
    metadata = dict(img.metadata)
    metadata["compensations"] = compensations
    return replace(img, pixels=pixels, metadata=metadata)


def apply_compensations(img: FocusedImage, chain: CompensationChain, plan: CollectionPlan) -> FocusedImage:
    """
    Multiply the image by the compensation chain

    Args:
        img: Focused image
        chain: Corrections to apply
        plan: Collection plan that produced the image

    Returns:
        New image with corrections recorded in metadata["compensations"]
    """
    surface = gain_surface(img, chain, plan)
    applied = list(img.metadata.get("compensations", [])) + [c.value for c in chain.corrections]
    logger.info(f"Applied compensations {[c.value for c in chain.corrections]}")
    return _with_pixels(img, img.pixels * surface, applied)


def invert_compensations(img: FocusedImage, chain: CompensationChain, plan: CollectionPlan) -> FocusedImage:
    """Exact inverse of apply_compensations"""
    surface = gain_surface(img, chain, plan)
    names = [c.value for c in chain.corrections]
    applied = list(img.metadata.get("compensations", []))
    if applied[-len(names):] == names:
        applied = applied[: len(applied) - len(names)]
    return _with_pixels(img, img.pixels / surface, applied)


def estimate_calibration_constant(
    slc_chips: Sequence[IRFChip], true_rcs: Sequence[float]
) -> CalibrationReport:
    """
    Absolute calibration constant from point-target chips (integrated energy method)

    K_i = rcs_i / ((E_i - background) * pixel_area); the constant is their
    geometric mean.

    Raises:
        TooFewReflectorsError: With fewer than three chips
        BackgroundTooHighError: If a chip's background exceeds -30 dB of its peak
    """
    if len(slc_chips) < 3:
        raise TooFewReflectorsError(f"need at least 3 reflectors, got {len(slc_chips)}")
    if len(slc_chips) != len(true_rcs):
        raise ValidationError("one true rcs per chip required", field="true_rcs")
    chips = []
    constants = []
    for chip, rcs in zip(slc_chips, true_rcs):
        energy, background = integrated_energy(chip)
        if not energy > 0:
            raise NonInvertibleError(f"chip {chip.name} has no net energy")
        k = rcs / (energy * chip.range_spacing * chip.azimuth_spacing)
        constants.append(k)
        chips.append(ChipCalibration(target=chip.name, rcs=rcs, integrated_energy=energy,
                                     background=background, constant=k))
    log_k = 10.0 * np.log10(np.asarray(constants))
    constant = float(10.0 ** (log_k.mean() / 10.0))
    residual = float(np.std(log_k, ddof=1))
    logger.info(f"Calibration constant {10 * math.log10(constant):.2f} dB over {len(chips)} chips "
                f"(residual {residual:.3f} dB)")
    return CalibrationReport(constant=constant, constant_db=10.0 * math.log10(constant),
                             residual_std_db=residual, chips=chips)


def estimate_nesz(noise_region: np.ndarray, metadata: ProductMetadata, incidence: float) -> float:
    """
    Mean calibrated noise power as equivalent sigma nought (dB)

    Complex regions are checked for complex-Gaussian statistics
    (E[I^2] / E[I]^2 = 2). An all-zero region returns the -60 dB floor.

    Raises:
        RegionContaminatedError: If the intensity statistics betray a target
    """
    if metadata.calibration_constant is None:
        raise ValidationError("NESZ needs a calibrated product", field="calibration_constant")
    region = np.asarray(noise_region)
    intensity = (np.abs(region).astype(float) * metadata.quantization_scale) ** 2
    mean = float(intensity.mean()) if intensity.size else 0.0
    if mean == 0.0:
        logger.warning(f"Noise region holds no power; reporting NESZ floor {NESZ_FLOOR_DB} dB")
        return NESZ_FLOOR_DB
    if np.iscomplexobj(region):
        ratio = float(np.mean(intensity ** 2)) / mean ** 2
        tolerance = 5.0 * math.sqrt(20.0 / intensity.size)
        if abs(ratio - 2.0) > tolerance:
            raise RegionContaminatedError(
                f"intensity moment ratio {ratio:.3f} departs from 2 by more than {tolerance:.3f}"
            )
    sigma = metadata.calibration_constant * mean * math.sin(math.radians(incidence))
    return float(max(10.0 * math.log10(sigma), NESZ_FLOOR_DB))


def _band_mean_pattern(plan: CollectionPlan, cfg: FocusConfig, power: float) -> float:
    """Mean of the two-way azimuth pattern raised to power over the processed Doppler band"""
    speed = scene_reference(plan).state.speed
    half = 0.5 * cfg.processed_doppler_bandwidth
    value, _ = integrate.quad(
        lambda f: float(azimuth_gain_two_way(plan.antenna, f, speed)) ** power, -half, half
    )
    return value / cfg.processed_doppler_bandwidth


def equalization_noise_gain(plan: CollectionPlan, cfg: FocusConfig) -> float:
    """Noise power gain (linear) of Stripmap azimuth pattern equalization"""
    if plan.geom.mode == AcquisitionMode.SPOTLIGHT or not cfg.equalize_azimuth_pattern:
        return 1.0
    return _band_mean_pattern(plan, cfg, -1.0)


def theoretical_nesz(
    plan: CollectionPlan,
    reference_range: Optional[float] = None,
    cfg: Optional[FocusConfig] = None,
) -> float:
    """
    Radar-equation NESZ (dB) of a plan at the scene center

    With a focusing configuration the noise gain of azimuth pattern
    equalization is included, giving the level of the processed SLC.
    """
    ref = scene_reference(plan)
    r = ref.slant_range if reference_range is None else reference_range
    noise = plan.noise
    lam = plan.wavelength
    kt = BOLTZMANN * noise.system_temperature * 10.0 ** (noise.noise_figure_db / 10.0)
    losses = 10.0 ** (noise.losses_db / 10.0)
    vr = ref.state.speed * math.sqrt(ref.ground_velocity / ref.state.speed)
    g0 = plan.peak_gain_linear
    nesz = (4.0 * (4.0 * math.pi) ** 3 * kt * losses * plan.chirp.bandwidth * r ** 3 * vr ** 2
            * math.sin(math.radians(ref.incidence))
            / (plan.average_power * g0 ** 2 * lam ** 3 * SPEED_OF_LIGHT * ref.ground_velocity))
    if cfg is not None:
        nesz *= equalization_noise_gain(plan, cfg)
    return float(10.0 * math.log10(nesz))


def theoretical_calibration_constant(
    plan: CollectionPlan,
    cfg: FocusConfig = FocusConfig(),
    chain: Optional[CompensationChain] = None,
    slant_range: Optional[float] = None,
) -> float:
    """
    Radar-equation calibration constant rcs / (integrated energy * pixel area)

    Predicts the constant for a point target on the scene-center zero-Doppler
    line at slant_range, focused with UNIFORM windows, after the chain's
    compensations. The elevation pattern is taken at the nominal boresight.

    Args:
        plan: Collection plan
        cfg: Focusing configuration
        chain: Compensations applied before SLC formation
        slant_range: Target slant range; the scene center when omitted

    Returns:
        Linear calibration constant
    """
    ref = scene_reference(plan)
    r = ref.slant_range if slant_range is None else slant_range
    lam = plan.wavelength
    el = _elevation_offsets(plan, np.array([r]))
    gain = antenna_gain_two_way(plan.antenna, np.zeros_like(el), el, lam)
    amplitude = float(echo_amplitude(plan, 1.0, np.array([r]), gain)[0])
    b_az = azimuth_bandwidth(plan, cfg)
    if plan.geom.mode == AcquisitionMode.SPOTLIGHT:
        pulses = float(plan.num_pulses)
        pattern = 1.0
    else:
        half_span = 0.25 * (plan.stop - plan.start)
        vr, _ = effective_velocity(plan.geom.orbit, ref.center, ref.time, half_span)
        pulses = plan.prf * b_az * lam * r / (2.0 * vr ** 2)
        pattern = 1.0 if cfg.equalize_azimuth_pattern else _band_mean_pattern(plan, cfg, 1.0)
    peak = amplitude * plan.chirp.num_samples * pulses
    # energy of a band-limited response over the image plane
    energy_area = (pattern * peak ** 2 * SPEED_OF_LIGHT * ref.ground_velocity
                   / (2.0 * plan.chirp.bandwidth * b_az))
    if chain is not None and chain.corrections:
        pixel = FocusedImage(
            pixels=np.ones((1, 1), dtype=complex),
            azimuth_time_axis=np.array([ref.time]),
            slant_range_axis=np.array([r]),
            config=cfg,
            plan=plan,
            metadata={"azimuth_bandwidth": b_az},
        )
        energy_area *= float(gain_surface(pixel, chain, plan).item()) ** 2
    return 1.0 / energy_area


def estimate_aasr(antenna: AntennaModel, prf: float, processed_bw: float, ground_velocity: float) -> float:
    """
    Azimuth ambiguity-to-signal ratio (dB), orders |k| <= 5

    Two-way power pattern in Doppler, aliased at multiples of the PRF and
    integrated over the processed band.
    """
    if not 0 < processed_bw < prf:
        raise ValidationError("processed bandwidth must be positive and below the PRF", field="processed_bw")
    half = 0.5 * processed_bw

    def band_energy(shift: float) -> float:
        value, _ = integrate.quad(
            lambda f: float(azimuth_gain_two_way(antenna, np.asarray(f + shift), ground_velocity)),
            -half, half, limit=200,
        )
        return value

    main = band_energy(0.0)
    ambiguous = sum(band_energy(k * prf) for k in range(-AMBIGUITY_ORDERS, AMBIGUITY_ORDERS + 1) if k)
    if not ambiguous > 0 or not math.isfinite(ambiguous):
        return RATIO_FLOOR_DB
    return float(max(10.0 * math.log10(ambiguous / main), RATIO_FLOOR_DB))


def simulate_aasr(
    antenna: AntennaModel,
    prf: float,
    processed_bw: float,
    velocity: float,
    wavelength: float,
    slant_range: float,
    half_span: float = 6.0,
    window: float = 0.1,
) -> float:
    """
    Azimuth ambiguity ratio measured on a 1-D aliased point-target simulation

    The target phase history is sampled at the PRF, compressed with a matched
    filter band-limited to processed_bw, and the energy around the ghosts at
    k * prf / Ka is compared to the main response.
    """
    ka = 2.0 * velocity ** 2 / (wavelength * slant_range)
    n = int(round(2 * half_span * prf))
    eta = (np.arange(n) - n // 2) / prf
    amplitude = np.sqrt(azimuth_gain_two_way(antenna, -ka * eta, velocity))
    history = amplitude * np.exp(-1j * np.pi * ka * eta ** 2)
    freqs = fft.fftfreq(n, 1.0 / prf)
    filt = np.where(np.abs(freqs) <= 0.5 * processed_bw, np.exp(-1j * np.pi * freqs ** 2 / ka), 0.0)
    image = fft.ifft(fft.fft(fft.ifftshift(history)) * filt)
    power = np.abs(fft.fftshift(image)) ** 2

    def energy(center: float) -> float:
        return float(np.sum(power[np.abs(eta - center) <= window]))

    main = energy(0.0)
    ghosts = 0.0
    for k in range(-AMBIGUITY_ORDERS, AMBIGUITY_ORDERS + 1):
        if k and abs(k * prf / ka) + window < half_span:
            ghosts += energy(k * prf / ka)
    if ghosts <= 0:
        return RATIO_FLOOR_DB
    return float(10.0 * math.log10(ghosts / main))


def rasr_contributions(
    antenna: AntennaModel,
    geom: AcquisitionGeometry,
    prf: float,
    swath_points: int = 21,
    wavelength: float = SPEED_OF_LIGHT / DEFAULT_CARRIER_FREQUENCY,
    orders: Sequence[int] = tuple(k for k in range(-AMBIGUITY_ORDERS, AMBIGUITY_ORDERS + 1) if k),
) -> Tuple[np.ndarray, Dict[int, np.ndarray]]:
    """
    Per-order range ambiguity ratios (linear) across the -3 dB elevation beam

    Returns:
        Tuple of (swath look angles from boresight in rad, {order: ratio per swath point})
    """
    state = propagate_orbit(geom.orbit, geom.orbit.epoch)
    ellipsoid = geom.orbit.ellipsoid
    plane = CrossTrackPlane(state, geom.look_side, ellipsoid, geom.scene_height)
    _, boresight = look_angle_for_incidence(state, geom.center_incidence, geom.look_side,
                                            ellipsoid, geom.scene_height)
    half_beam = math.asin(0.443 * wavelength / antenna.height_elevation)
    offsets = np.linspace(-half_beam, half_beam, swath_points) if swath_points > 1 else np.zeros(1)
    psi0 = plane.nadir_psi + boresight + offsets
    r0 = plane.ray_distance(psi0)
    altitude = plane.altitude
    horizon = float(plane.ray_distance(plane.tangent_psi - 1e-9))

    def weight(psi: np.ndarray, rng: np.ndarray) -> np.ndarray:
        el = psi - plane.nadir_psi - boresight
        gain = antenna_gain_two_way(antenna, np.zeros_like(el), el, wavelength)
        pts = state.position + rng[:, None] * plane.direction(psi)
        inc = np.radians(np.atleast_1d(incidence_angle(state, pts, ellipsoid)))
        return gain / (rng ** 3 * np.sin(inc))

    main = weight(psi0, r0)
    result: Dict[int, np.ndarray] = {}
    spacing = SPEED_OF_LIGHT / (2.0 * prf)
    for k in orders:
        rk = r0 + k * spacing
        ratio = np.zeros_like(r0)
        valid = (rk > altitude) & (rk < horizon)
        if np.any(valid):
            psi_k = plane.psi_for_range(rk[valid])
            ratio[valid] = weight(psi_k, rk[valid]) / main[valid]
        result[int(k)] = ratio
    return offsets, result


def estimate_rasr(
    antenna: AntennaModel,
    geom: AcquisitionGeometry,
    prf: float,
    swath_points: int = 21,
    wavelength: float = SPEED_OF_LIGHT / DEFAULT_CARRIER_FREQUENCY,
) -> float:
    """
    Range ambiguity-to-signal ratio (dB), worst case over the -3 dB swath, orders |k| <= 5

    Ambiguous echoes are weighted by the two-way elevation pattern and
    R^3 sin(incidence) spreading at their own geometry.
    """
    _, per_order = rasr_contributions(antenna, geom, prf, swath_points, wavelength)
    total = np.sum(np.stack(list(per_order.values())), axis=0)
    worst = float(total.max())
    if worst <= 0:
        return RATIO_FLOOR_DB
    return float(max(10.0 * math.log10(worst), RATIO_FLOOR_DB))
