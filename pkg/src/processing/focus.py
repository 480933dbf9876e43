"""
SAR focusing
Range-Doppler algorithm for Stripmap and time-domain back-projection for
any mode. Both processors share one gain convention: a point target with
range-compressed peak amplitude A focuses to A times the sum of its azimuth
aperture weights.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np
from scipy import fft, signal as sps, special

from ..config.config import get_config
from ..core.exceptions import (
    DopplerOverflowError,
    GridOutsideCollectionError,
    ModeUnsupportedError,
    ValidationError,
)
from .geometry import (
    AcquisitionMode,
    effective_velocity,
    orbit_states,
    propagate_orbit,
    zero_doppler_ground_point,
)
from .rawsim import CollectionPlan, RawDataMatrix, azimuth_gain_two_way, scene_reference
from .signal import (
    RESOLUTION_KAPPA_UNIFORM,
    SPEED_OF_LIGHT,
    WindowSpec,
    matched_filter,
    next_pow2,
    raised_cosine_weights,
    resolution_kappa,
    window_weights,
)

logger = logging.getLogger(__name__)

KAISER_BETA = 2.5
DOPPLER_LIMIT_FRACTION = 0.9


class FocusAlgorithm(str, Enum):
    RANGE_DOPPLER = "RANGE_DOPPLER"
    BACKPROJECTION = "BACKPROJECTION"


@dataclass(frozen=True)
class FocusConfig:
    """
    Processing parameters

    equalize_azimuth_pattern divides the two-way azimuth antenna pattern out
    of the processed band so an unweighted SLC keeps a sinc-like response.
    """
    processed_doppler_bandwidth: float = 2700.0
    rcmc_kernel_taps: int = 8
    algorithm: FocusAlgorithm = FocusAlgorithm.RANGE_DOPPLER
    azimuth_window: WindowSpec = field(default_factory=WindowSpec)
    range_window: WindowSpec = field(default_factory=WindowSpec)
    equalize_azimuth_pattern: bool = True
    range_upsampling: int = 8

    def __post_init__(self) -> None:
        object.__setattr__(self, "algorithm", FocusAlgorithm(self.algorithm))
        if not self.processed_doppler_bandwidth > 0:
            raise ValidationError("processed Doppler bandwidth must be positive",
                                  field="processed_doppler_bandwidth")
        if self.rcmc_kernel_taps < 4 or self.rcmc_kernel_taps % 2:
            raise ValidationError("rcmc_kernel_taps must be even and >= 4", field="rcmc_kernel_taps")
        if self.range_upsampling < 1:
            raise ValidationError("range_upsampling must be >= 1", field="range_upsampling")


@dataclass(frozen=True, eq=False)
class ImageGrid:
    """Output grid in zero-Doppler time by slant range"""
    azimuth_time_axis: np.ndarray
    slant_range_axis: np.ndarray

    def __post_init__(self) -> None:
        for name in ("azimuth_time_axis", "slant_range_axis"):
            axis = np.asarray(getattr(self, name), dtype=float)
            object.__setattr__(self, name, axis)
            if axis.ndim != 1 or axis.size < 1:
                raise ValidationError(f"{name} must be a non-empty vector", field=name)
            if axis.size > 1:
                step = np.diff(axis)
                if not np.all(step > 0) or not np.allclose(step, step[0], rtol=1e-6, atol=0):
                    raise ValidationError(f"{name} must be increasing and uniform", field=name)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.azimuth_time_axis.size, self.slant_range_axis.size


@dataclass(eq=False)
class FocusedImage:
    pixels: np.ndarray
    azimuth_time_axis: np.ndarray
    slant_range_axis: np.ndarray
    config: FocusConfig
    plan: CollectionPlan
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        ImageGrid(self.azimuth_time_axis, self.slant_range_axis)
        if self.pixels.shape != (self.azimuth_time_axis.size, self.slant_range_axis.size):
            raise ValidationError("pixel array does not match its axes", field="pixels")

    @property
    def grid(self) -> ImageGrid:
        return ImageGrid(self.azimuth_time_axis, self.slant_range_axis)

    @property
    def azimuth_time_spacing(self) -> float:
        axis = self.azimuth_time_axis
        return float(axis[1] - axis[0]) if axis.size > 1 else 1.0 / self.plan.prf

    @property
    def range_spacing(self) -> float:
        axis = self.slant_range_axis
        return float(axis[1] - axis[0]) if axis.size > 1 else self.plan.chirp.range_sample_spacing

    @property
    def azimuth_spacing(self) -> float:
        """Azimuth pixel spacing on the ground in meters"""
        return self.azimuth_time_spacing * scene_reference(self.plan).ground_velocity


def range_compress(raw: RawDataMatrix, window: WindowSpec = WindowSpec()) -> np.ndarray:
    return matched_filter(raw.samples, raw.plan.chirp, window, axis=1)


def _kaiser_sinc_weights(frac: np.ndarray, taps: int) -> np.ndarray:
    """Normalized Kaiser-weighted sinc taps for fractional offsets, shape frac.shape + (taps,)"""
    offsets = np.arange(-taps // 2 + 1, taps // 2 + 1)
    x = offsets - frac[..., None]
    half = taps / 2.0
    taper = special.i0(KAISER_BETA * np.sqrt(np.clip(1.0 - (x / half) ** 2, 0.0, 1.0))) / special.i0(KAISER_BETA)
    w = np.sinc(x) * taper
    return w / np.sum(w, axis=-1, keepdims=True)


def _interpolate_rows(data: np.ndarray, positions: np.ndarray, taps: int) -> np.ndarray:
    """Sinc-interpolate each row of data at fractional sample positions (zero outside)"""
    n = data.shape[1]
    base = np.floor(positions).astype(int)
    frac = positions - base
    weights = _kaiser_sinc_weights(frac, taps)
    out = np.zeros(positions.shape, dtype=complex)
    rows = np.arange(data.shape[0])[:, None]
    for j, off in enumerate(range(-taps // 2 + 1, taps // 2 + 1)):
        idx = base + off
        valid = (idx >= 0) & (idx < n)
        vals = data[rows, np.clip(idx, 0, n - 1)]
        out += np.where(valid, vals, 0.0) * weights[..., j]
    return out


def _check_doppler(plan: CollectionPlan, cfg: FocusConfig) -> None:
    if cfg.processed_doppler_bandwidth > DOPPLER_LIMIT_FRACTION * plan.prf:
        raise DopplerOverflowError(
            f"processed Doppler bandwidth {cfg.processed_doppler_bandwidth:.0f} Hz exceeds "
            f"{DOPPLER_LIMIT_FRACTION} x PRF ({plan.prf:.0f} Hz)"
        )


def focus_range_doppler(
    raw: RawDataMatrix,
    cfg: FocusConfig = FocusConfig(),
    threads: Optional[int] = None,
    block_rows: int = 512,
) -> FocusedImage:
    """
    Range-Doppler focusing of a Stripmap collection

    Range compression, azimuth FFT, RCMC by Kaiser-weighted sinc
    interpolation, hyperbolic azimuth matched filter band-limited to the
    processed Doppler bandwidth, inverse azimuth FFT.

    Args:
        raw: Raw data of a Stripmap collection
        cfg: Focusing parameters
        threads: Worker threads over Doppler row blocks
        block_rows: Doppler rows per work item

    Returns:
        Focused complex image on the raw pulse-time by range-sample grid

    Raises:
        ModeUnsupportedError: For Spotlight collections
        DopplerOverflowError: If the processed band exceeds 0.9 x PRF
    """
    plan = raw.plan
    if plan.geom.mode != AcquisitionMode.STRIPMAP:
        raise ModeUnsupportedError("range-Doppler focusing handles Stripmap only; use back-projection")
    _check_doppler(plan, cfg)
    if threads is None:
        threads = get_config().threads

    lam = plan.wavelength
    prf = plan.prf
    ref = scene_reference(plan)
    half_span = 0.25 * (plan.stop - plan.start)
    vr, _ = effective_velocity(plan.geom.orbit, ref.center, ref.time, half_span)
    sensor_speed = ref.state.speed

    rc = range_compress(raw, cfg.range_window)
    n_az = raw.num_pulses
    nfft = next_pow2(n_az)
    spectrum = fft.fft(rc, nfft, axis=0)
    freqs = fft.fftfreq(nfft, 1.0 / prf)
    ranges = raw.slant_range_axis
    fs = plan.chirp.sample_rate
    t_start = raw.range_window_start

    migration = np.sqrt(np.clip(1.0 - (lam * freqs / (2.0 * vr)) ** 2, 1e-12, None))
    band = np.abs(freqs) <= 0.5 * cfg.processed_doppler_bandwidth
    weights = window_weights(freqs, cfg.processed_doppler_bandwidth, cfg.azimuth_window)
    if cfg.equalize_azimuth_pattern:
        pattern = np.sqrt(azimuth_gain_two_way(plan.antenna, freqs, sensor_speed))
        weights = weights / np.where(band, pattern, 1.0)
    weights = np.where(band, weights, 0.0)
    ka = 2.0 * vr ** 2 / (lam * ranges)

    focused_spectrum = np.zeros_like(spectrum)

    def work(lo: int) -> None:
        hi = min(lo + block_rows, nfft)
        rows = slice(lo, hi)
        keep = band[rows]
        if not np.any(keep):
            return
        d = migration[rows][:, None]
        src = ((2.0 * ranges[None, :] / d) / SPEED_OF_LIGHT - t_start) * fs
        corrected = _interpolate_rows(spectrum[rows], src, cfg.rcmc_kernel_taps)
        # (d - 1) keeps the target phase -4 pi R0 / lambda constant across its range mainlobe
        phase = 4.0 * np.pi * ranges[None, :] * (d - 1.0) / lam + 0.25 * np.pi
        filt = np.exp(1j * phase) * (prf * weights[rows][:, None] / np.sqrt(ka)[None, :])
        focused_spectrum[rows] = corrected * filt

    blocks = range(0, nfft, block_rows)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, blocks))
    else:
        for lo in blocks:
            work(lo)

    pixels = fft.ifft(focused_spectrum, axis=0)[:n_az]
    logger.info(
        f"Range-Doppler focused {n_az} x {raw.num_samples} "
        f"(FFT {nfft}, Vr {vr:.1f} m/s, band {cfg.processed_doppler_bandwidth:.0f} Hz)"
    )
    return FocusedImage(
        pixels=pixels,
        azimuth_time_axis=raw.pulse_times.copy(),
        slant_range_axis=ranges.copy(),
        config=cfg,
        plan=plan,
        metadata={
            "algorithm": FocusAlgorithm.RANGE_DOPPLER.value,
            "azimuth_fft_size": nfft,
            "effective_velocity": vr,
            "noise_power_raw": raw.noise_power,
            "range_compression_gain": float(plan.chirp.num_samples),
            "azimuth_bandwidth": azimuth_bandwidth(plan, cfg),
            "range_bandwidth": plan.chirp.bandwidth,
        },
    )


def azimuth_bandwidth(plan: CollectionPlan, cfg: FocusConfig) -> float:
    """Doppler bandwidth carried by a focused image"""
    if plan.geom.mode != AcquisitionMode.SPOTLIGHT:
        return cfg.processed_doppler_bandwidth
    ref = scene_reference(plan)
    duration = plan.stop - plan.start
    vr, r0 = effective_velocity(plan.geom.orbit, ref.center, ref.time, 0.5 * duration)
    return 2.0 * vr ** 2 / (plan.wavelength * r0) * duration


def spotlight_azimuth_resolution(plan: CollectionPlan, window: WindowSpec = WindowSpec()) -> float:
    """Azimuth resolution of the full Spotlight aperture at the scene center (NOMINAL convention)"""
    ref = scene_reference(plan)
    return resolution_kappa(window) * ref.ground_velocity / azimuth_bandwidth(plan, FocusConfig())


def scene_grid(
    plan: CollectionPlan,
    n_azimuth: int = 128,
    n_range: int = 128,
    azimuth_spacing: Optional[float] = None,
    range_spacing: Optional[float] = None,
    center: Optional[Tuple[float, float]] = None,
) -> ImageGrid:
    """
    Grid centered on the scene (or on center=(time, slant_range))

    Spacings are in meters; defaults oversample the expected resolution by two.
    """
    ref = scene_reference(plan)
    t_c, r_c = center if center is not None else (ref.time, ref.slant_range)
    if range_spacing is None:
        range_spacing = 0.5 * plan.chirp.range_sample_spacing * plan.chirp.sample_rate / plan.chirp.bandwidth
    if azimuth_spacing is None:
        if plan.geom.mode == AcquisitionMode.SPOTLIGHT:
            azimuth_spacing = 0.5 * spotlight_azimuth_resolution(plan)
        else:
            azimuth_spacing = 0.5 * plan.antenna.length_azimuth / 2.0
    dt = azimuth_spacing / ref.ground_velocity
    az = t_c + (np.arange(n_azimuth) - n_azimuth // 2) * dt
    rg = r_c + (np.arange(n_range) - n_range // 2) * range_spacing
    return ImageGrid(az, rg)


def _upsample_rows(data: np.ndarray, factor: int) -> np.ndarray:
    if factor == 1:
        return data
    return sps.resample(data, data.shape[1] * factor, axis=1)


def focus_backprojection(
    raw: RawDataMatrix,
    grid: Union[ImageGrid, FocusedImage, None] = None,
    cfg: FocusConfig = FocusConfig(algorithm=FocusAlgorithm.BACKPROJECTION),
    threads: Optional[int] = None,
    chunk_pulses: int = 128,
) -> FocusedImage:
    """
    Time-domain back-projection onto an arbitrary zero-Doppler grid

    Each pixel is geolocated in the zero-Doppler plane of its azimuth time;
    per pulse the FFT-upsampled range-compressed line is linearly
    interpolated at the exact two-way delay and phase-compensated with
    exp(+j 4 pi (R - R0) / lambda), R0 being the pixel's zero-Doppler range,
    which leaves the image at baseband like the range-Doppler output.
    Stripmap pulses are weighted by the azimuth window (and inverse antenna
    pattern) at the pixel's instantaneous Doppler within the processed
    band; Spotlight pulses by the window over the full aperture.

    Args:
        raw: Raw data of any mode
        grid: Output grid or an image whose axes to reuse; None builds scene_grid
        cfg: Focusing parameters
        threads: Worker threads over grid rows
        chunk_pulses: Pulses upsampled at a time

    Returns:
        Focused complex image on the grid

    Raises:
        GridOutsideCollectionError: If the grid leaves the collection time or range window
    """
    plan = raw.plan
    if grid is None:
        grid = scene_grid(plan)
    elif isinstance(grid, FocusedImage):
        grid = grid.grid
    if threads is None:
        threads = get_config().threads

    t_axis, r_axis = grid.azimuth_time_axis, grid.slant_range_axis
    window_ranges = raw.slant_range_axis
    if (t_axis[0] < raw.pulse_times[0] or t_axis[-1] > raw.pulse_times[-1]
            or r_axis[0] < window_ranges[0] or r_axis[-1] > window_ranges[-1]):
        raise GridOutsideCollectionError(
            f"grid [{t_axis[0]:.4f}, {t_axis[-1]:.4f}] s x [{r_axis[0]:.1f}, {r_axis[-1]:.1f}] m "
            f"outside collection [{raw.pulse_times[0]:.4f}, {raw.pulse_times[-1]:.4f}] s x "
            f"[{window_ranges[0]:.1f}, {window_ranges[-1]:.1f}] m"
        )

    geom = plan.geom
    ellipsoid = geom.orbit.ellipsoid
    pixels_xyz = np.empty(grid.shape + (3,))
    for i, t in enumerate(t_axis):
        state = propagate_orbit(geom.orbit, float(t))
        pixels_xyz[i] = zero_doppler_ground_point(
            state, r_axis, geom.look_side, ellipsoid, geom.scene_height
        )

    lam = plan.wavelength
    fs = plan.chirp.sample_rate * cfg.range_upsampling
    t_start = raw.range_window_start
    spotlight = geom.mode == AcquisitionMode.SPOTLIGHT
    if not spotlight:
        _check_doppler(plan, cfg)
    bandwidth = cfg.processed_doppler_bandwidth
    aperture = plan.stop - plan.start
    positions, velocities = orbit_states(geom.orbit, raw.pulse_times)
    speed = np.linalg.norm(velocities, axis=-1)

    rc = range_compress(raw, cfg.range_window)
    image = np.zeros(grid.shape, dtype=complex)
    n_up = raw.num_samples * cfg.range_upsampling
    row_blocks = np.array_split(np.arange(grid.shape[0]), max(1, min(threads, grid.shape[0])))

    for lo in range(0, raw.num_pulses, chunk_pulses):
        hi = min(lo + chunk_pulses, raw.num_pulses)
        lines = _upsample_rows(rc[lo:hi], cfg.range_upsampling)

        def work(rows: np.ndarray) -> None:
            pix = pixels_xyz[rows]
            acc = image[rows]
            for k in range(lo, hi):
                diff = pix - positions[k]
                rng = np.linalg.norm(diff, axis=-1)
                pos = (2.0 * rng / SPEED_OF_LIGHT - t_start) * fs
                base = np.floor(pos).astype(int)
                frac = pos - base
                inside = (base >= 0) & (base < n_up - 1)
                b = np.clip(base, 0, n_up - 2)
                line = lines[k - lo]
                val = line[b] * (1.0 - frac) + line[b + 1] * frac
                if spotlight:
                    w = float(raised_cosine_weights(
                        raw.pulse_times[k] - plan.center_time, aperture, cfg.azimuth_window.coefficient
                    )) if not cfg.azimuth_window.is_uniform else 1.0
                    weight = np.where(inside, w, 0.0)
                else:
                    doppler = 2.0 * np.sum(velocities[k] * diff, axis=-1) / (lam * rng)
                    w = window_weights(doppler, bandwidth, cfg.azimuth_window)
                    if cfg.equalize_azimuth_pattern:
                        w = w / np.sqrt(azimuth_gain_two_way(plan.antenna, doppler, speed[k]))
                    weight = np.where(inside & (np.abs(doppler) <= 0.5 * bandwidth), w, 0.0)
                acc += val * np.exp(4j * np.pi * (rng - r_axis[None, :]) / lam) * weight
            image[rows] = acc

        if threads > 1 and len(row_blocks) > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                list(pool.map(work, row_blocks))
        else:
            for rows in row_blocks:
                work(rows)

    logger.info(
        f"Back-projected {raw.num_pulses} pulses onto {grid.shape[0]} x {grid.shape[1]} grid "
        f"({geom.mode.value})"
    )
    return FocusedImage(
        pixels=image,
        azimuth_time_axis=t_axis.copy(),
        slant_range_axis=r_axis.copy(),
        config=cfg,
        plan=plan,
        metadata={
            "algorithm": FocusAlgorithm.BACKPROJECTION.value,
            "range_upsampling": cfg.range_upsampling,
            "noise_power_raw": raw.noise_power,
            "range_compression_gain": float(plan.chirp.num_samples),
            "azimuth_bandwidth": azimuth_bandwidth(plan, cfg),
            "range_bandwidth": plan.chirp.bandwidth,
        },
    )


def focus(
    raw: RawDataMatrix,
    cfg: FocusConfig = FocusConfig(),
    grid: Optional[ImageGrid] = None,
    threads: Optional[int] = None,
) -> FocusedImage:
    """Route Stripmap to the configured algorithm and Spotlight to back-projection"""
    if raw.plan.geom.mode == AcquisitionMode.SPOTLIGHT or cfg.algorithm == FocusAlgorithm.BACKPROJECTION:
        return focus_backprojection(raw, grid, cfg, threads=threads)
    return focus_range_doppler(raw, cfg, threads=threads)


def stripmap_azimuth_resolution(
    cfg: FocusConfig, ground_velocity: float, antenna_length: float = 3.2
) -> float:
    """
    Stripmap azimuth resolution kappa_az * v_g / B, never below half the antenna length

    Args:
        cfg: Focusing parameters (processed bandwidth, azimuth window)
        ground_velocity: Footprint speed in m/s
        antenna_length: Azimuth antenna length in meters

    Returns:
        Resolution in meters
    """
    if not cfg.processed_doppler_bandwidth > 0:
        raise ValidationError("processed bandwidth must be positive", field="processed_doppler_bandwidth")
    if math.isinf(cfg.processed_doppler_bandwidth):
        return antenna_length / 2.0
    kappa = resolution_kappa(cfg.azimuth_window)
    return max(antenna_length / 2.0, kappa * ground_velocity / cfg.processed_doppler_bandwidth)


__all__ = [
    "FocusAlgorithm",
    "FocusConfig",
    "FocusedImage",
    "ImageGrid",
    "RESOLUTION_KAPPA_UNIFORM",
    "focus",
    "focus_backprojection",
    "focus_range_doppler",
    "range_compress",
    "scene_grid",
    "spotlight_azimuth_resolution",
    "stripmap_azimuth_resolution",
]
