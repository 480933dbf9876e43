"""
Level-1 products
Single-look complex (slant range, unweighted) and ground-range detected
(windowed sub-look multilook, projected to an equidistant ground grid,
16-bit quantized) products.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import fft
from scipy.interpolate import CubicSpline

from .. import __version__
from ..core.exceptions import (
    MissingCalibrationError,
    SaturationExceededError,
    SpacingUnreachableError,
    ValidationError,
    WindowedInputError,
)
from ..core.models import ProductMetadata
from .focus import FocusedImage
from .geometry import (
    AcquisitionGeometry,
    AcquisitionMode,
    incidence_angle,
    slant_to_ground,
    zero_doppler_ground_point,
)
from .rawsim import CollectionPlan, scene_reference
from .signal import (
    SINC_HALF_POWER_WIDTH,
    SPEED_OF_LIGHT,
    WindowSpec,
    demodulate,
    raised_cosine_weights,
    window_broadening,
)

logger = logging.getLogger(__name__)

INT16_MAX = 32767
PERCENTILE_HEADROOM = 0.9
MAX_CLIP_FRACTION = 1e-4
CUBIC_A = -0.5

GRD_RESOLUTION = {AcquisitionMode.STRIPMAP: 3.0, AcquisitionMode.SPOTLIGHT: 1.0}
GRD_SPACING = {AcquisitionMode.STRIPMAP: 2.5, AcquisitionMode.SPOTLIGHT: 0.5}
SLC_SPACING_BANDS = {
    AcquisitionMode.STRIPMAP: {"range": (0.4, 1.3), "azimuth": (1.4, 1.7)},
}
DETECTION_RULE = "power-average-sqrt"
GROUND_RANGE_DEFINITION = "ARC_LENGTH"


class ScalePolicy(str, Enum):
    PERCENTILE_999 = "PERCENTILE_999"
    FIXED = "FIXED"


class Resampler(str, Enum):
    CUBIC = "CUBIC"
    LINEAR = "LINEAR"


@dataclass(eq=False)
class SLCProduct:
    pixels: np.ndarray
    range_spacing: float
    azimuth_spacing: float
    metadata: ProductMetadata
    azimuth_time_axis: np.ndarray
    slant_range_axis: np.ndarray
    plan: Optional[CollectionPlan] = None


@dataclass(eq=False)
class GRDProduct:
    pixels: np.ndarray
    ground_spacing: float
    azimuth_spacing: float
    looks: Tuple[int, int]
    metadata: ProductMetadata
    ground_range_axis: np.ndarray

    def __post_init__(self) -> None:
        if self.pixels.dtype != np.int16:
            raise ValidationError("GRD pixels must be int16", field="pixels")


def _window_summary(window: WindowSpec) -> Dict[str, object]:
    return {"family": window.family.value, "coefficient": window.coefficient,
            "target_pslr": window.target_pslr}


def scene_incidences(plan: CollectionPlan, slant_ranges: np.ndarray) -> np.ndarray:
    """Local incidence (deg) of zero-Doppler ground points seen from the scene-center state"""
    geom = plan.geom
    ref = scene_reference(plan)
    ellipsoid = geom.orbit.ellipsoid
    pts = zero_doppler_ground_point(ref.state, np.atleast_1d(slant_ranges), geom.look_side,
                                    ellipsoid, geom.scene_height)
    return np.atleast_1d(incidence_angle(ref.state, pts, ellipsoid))


def build_metadata(
    img: FocusedImage,
    product_type: str,
    calibration_constant: Optional[float] = None,
    **overrides: object,
) -> ProductMetadata:
    plan = img.plan
    ref = scene_reference(plan)
    inc = scene_incidences(plan, img.slant_range_axis[[0, -1]])
    fields = dict(
        product_type=product_type,
        mode=plan.geom.mode.value,
        look_side=plan.geom.look_side.value,
        calibration_constant=calibration_constant,
        quantization_scale=1.0,
        scene_height=plan.geom.scene_height,
        center_incidence=ref.incidence,
        incidence_near=float(inc[0]),
        incidence_far=float(inc[-1]),
        slant_range_first=float(img.slant_range_axis[0]),
        azimuth_time_first=float(img.azimuth_time_axis[0]),
        azimuth_time_spacing=img.azimuth_time_spacing,
        range_spacing=img.range_spacing,
        azimuth_spacing=img.azimuth_spacing,
        pixel_area=img.range_spacing * img.azimuth_spacing,
        range_bandwidth=plan.chirp.bandwidth,
        azimuth_bandwidth=float(img.metadata.get("azimuth_bandwidth", img.config.processed_doppler_bandwidth)),
        prf=plan.prf,
        sample_rate=plan.chirp.sample_rate,
        wavelength=plan.wavelength,
        ground_velocity=ref.ground_velocity,
        range_window=_window_summary(img.config.range_window),
        azimuth_window=_window_summary(img.config.azimuth_window),
        compensations=list(img.metadata.get("compensations", [])),
        processor_version=__version__,
    )
    fields.update(overrides)
    return ProductMetadata(**fields)


def form_slc(img: FocusedImage, calibration_constant: Optional[float] = None) -> SLCProduct:
    """
    Wrap a focused image as an SLC product

    Args:
        img: Focused image (UNIFORM range window)
        calibration_constant: Absolute calibration constant to annotate

    Returns:
        SLC product with pixels passed through unweighted

    Raises:
        WindowedInputError: If the image was range-compressed with a tapered window
    """
    if not img.config.range_window.is_uniform:
        raise WindowedInputError("SLC products require an unweighted range compression")
    metadata = build_metadata(img, "SLC", calibration_constant)
    bands = SLC_SPACING_BANDS.get(img.plan.geom.mode)
    if bands:
        for name, value in (("range", metadata.range_spacing), ("azimuth", metadata.azimuth_spacing)):
            lo, hi = bands[name]
            if not lo <= value <= hi:
                logger.warning(f"SLC {name} spacing {value:.3f} m outside product band [{lo}, {hi}]")
    logger.info(f"Formed SLC {img.pixels.shape} (range {metadata.range_spacing:.3f} m, "
                f"azimuth {metadata.azimuth_spacing:.3f} m)")
    return SLCProduct(
        pixels=img.pixels,
        range_spacing=metadata.range_spacing,
        azimuth_spacing=metadata.azimuth_spacing,
        metadata=metadata,
        azimuth_time_axis=img.azimuth_time_axis,
        slant_range_axis=img.slant_range_axis,
        plan=img.plan,
    )


def subband_weights(
    n: int,
    sample_rate: float,
    bandwidth: float,
    looks: int,
    window: WindowSpec,
    center: float = 0.0,
    look_bandwidth: Optional[float] = None,
) -> List[np.ndarray]:
    """
    Spectral weights of non-overlapping sub-looks over fftfreq(n) bins

    Looks of look_bandwidth (default bandwidth/looks) sit side by side in the
    middle of the band centered at center, wrapped modulo the sample rate.
    Each is tapered by window; weights are scaled so the looks together carry
    the energy of the whole band.
    """
    freqs = fft.fftfreq(n, 1.0 / sample_rate)
    freqs = np.mod(freqs - center + 0.5 * sample_rate, sample_rate) - 0.5 * sample_rate
    width = bandwidth / looks if look_bandwidth is None else min(look_bandwidth, bandwidth / looks)
    used = looks * width
    band_bins = int(np.count_nonzero(np.abs(freqs) <= 0.5 * bandwidth))
    masks, out = [], []
    for j in range(looks):
        lo = -0.5 * used + j * width
        inside = (freqs >= lo) & (freqs < lo + width)
        if not np.any(inside):
            raise SpacingUnreachableError(f"sub-look {j} holds no spectral bins")
        if window.is_uniform:
            w = inside.astype(float)
        else:
            w = raised_cosine_weights(freqs - (lo + 0.5 * width), width, window.coefficient) * inside
        masks.append(inside)
        out.append(w / math.sqrt(float(np.mean(w[inside] ** 2))))
    used_bins = int(np.count_nonzero(np.any(masks, axis=0)))
    gain = math.sqrt(band_bins / used_bins)
    return [w * gain for w in out]


def detection_factor(sample_rate: float, look_bandwidth: float) -> int:
    """Upsampling that keeps a detected look, twice as wide in frequency, free of aliasing"""
    return max(1, math.ceil(2.0 * look_bandwidth / sample_rate - 1e-9))


def _zero_pad(spectrum: np.ndarray, factors: Tuple[int, int]) -> np.ndarray:
    """Embed an FFT-ordered spectrum in a longer one; every bin keeps its frequency"""
    out = spectrum
    for axis, factor in enumerate(factors):
        if factor == 1:
            continue
        a = np.moveaxis(out, axis, -1)
        n = a.shape[-1]
        pos = (n + 1) // 2
        padded = np.zeros(a.shape[:-1] + (n * factor,), dtype=complex)
        padded[..., :pos] = a[..., :pos]
        padded[..., n * factor - (n - pos):] = a[..., pos:]
        out = np.moveaxis(padded, -1, axis)
    return out


def multilook_intensity(
    pixels: np.ndarray,
    range_sample_rate: float,
    range_bandwidth: float,
    range_looks: int,
    azimuth_sample_rate: float,
    azimuth_bandwidth: float,
    azimuth_looks: int,
    window: WindowSpec,
    range_look_bandwidth: Optional[float] = None,
    azimuth_look_bandwidth: Optional[float] = None,
    upsample: Tuple[int, int] = (1, 1),
) -> np.ndarray:
    """
    Detected intensity summed over windowed spectral sub-looks

    Rows are azimuth, columns range. Sample rates are in the units of the
    spectra the bandwidths are given in. The image is shifted to baseband
    first, so looks sit around its spectral centroid. upsample=(azimuth,
    range) detects on a grid that many times denser.
    """
    n_az, n_rg = pixels.shape
    spectrum = fft.fft2(demodulate(pixels))
    w_rg = subband_weights(n_rg, range_sample_rate, min(range_bandwidth, range_sample_rate), range_looks,
                           window, look_bandwidth=range_look_bandwidth)
    w_az = subband_weights(n_az, azimuth_sample_rate, min(azimuth_bandwidth, azimuth_sample_rate),
                           azimuth_looks, window, look_bandwidth=azimuth_look_bandwidth)
    fa, fr = upsample
    intensity = np.zeros((n_az * fa, n_rg * fr))
    for wa in w_az:
        for wr in w_rg:
            look = fft.ifft2(_zero_pad(spectrum * wa[:, None] * wr[None, :], upsample)) * (fa * fr)
            intensity += look.real ** 2 + look.imag ** 2
    return intensity


def look_bandwidths(
    metadata: ProductMetadata, resolution: float, window: WindowSpec, incidence: float
) -> Tuple[float, float]:
    """Range (Hz) and azimuth (Hz) sub-look bandwidths whose -3 dB ground width is resolution"""
    spread = SINC_HALF_POWER_WIDTH * window_broadening(window)
    look_rg = spread * SPEED_OF_LIGHT / (2.0 * math.sin(math.radians(incidence)) * resolution)
    look_az = spread * metadata.ground_velocity / resolution
    return look_rg, look_az


def look_counts(
    slc: SLCProduct, resolution: float, window: WindowSpec, incidence: float
) -> Tuple[int, int]:
    """Range and azimuth sub-look counts that fit in the SLC bandwidths at the target resolution"""
    meta = slc.metadata
    look_rg, look_az = look_bandwidths(meta, resolution, window, incidence)
    return (max(1, int(meta.range_bandwidth // look_rg)),
            max(1, int(meta.azimuth_bandwidth // look_az)))


def ground_positions(slc: SLCProduct, geom: AcquisitionGeometry, nodes: int = 65) -> np.ndarray:
    """Ground range of every slant-range column (cubic spline through exact projections)"""
    ranges = slc.slant_range_axis
    ref = scene_reference(slc.plan)
    ellipsoid = geom.orbit.ellipsoid
    sample = np.linspace(ranges[0], ranges[-1], min(nodes, ranges.size))
    if sample.size < 2:
        return np.array([slant_to_ground(float(ranges[0]), geom, ref.state, ellipsoid)])
    ground = np.array([slant_to_ground(float(r), geom, ref.state, ellipsoid) for r in sample])
    return CubicSpline(sample, ground)(ranges)


def cubic_convolution_weights(frac: np.ndarray, a: float = CUBIC_A) -> np.ndarray:
    """Keys cubic convolution taps at offsets -1, 0, 1, 2 for fractional positions"""
    x = np.stack([1.0 + frac, frac, 1.0 - frac, 2.0 - frac], axis=-1)
    ax = np.abs(x)
    near = (a + 2.0) * ax ** 3 - (a + 3.0) * ax ** 2 + 1.0
    far = a * ax ** 3 - 5.0 * a * ax ** 2 + 8.0 * a * ax - 4.0 * a
    return np.where(ax <= 1.0, near, np.where(ax < 2.0, far, 0.0))


def resample_axis(data: np.ndarray, positions: np.ndarray, axis: int, method: Resampler) -> np.ndarray:
    """Interpolate data at fractional sample positions along one axis (edges clamped)"""
    data = np.moveaxis(data, axis, -1)
    n = data.shape[-1]
    base = np.floor(positions).astype(int)
    frac = positions - base
    if Resampler(method) == Resampler.LINEAR:
        i0 = np.clip(base, 0, n - 1)
        i1 = np.clip(base + 1, 0, n - 1)
        out = data[..., i0] * (1.0 - frac) + data[..., i1] * frac
    else:
        weights = cubic_convolution_weights(frac)
        out = np.zeros(data.shape[:-1] + positions.shape)
        for j, off in enumerate((-1, 0, 1, 2)):
            out = out + data[..., np.clip(base + off, 0, n - 1)] * weights[:, j]
    return np.moveaxis(out, -1, axis)


def quantize_int16(
    pixels: np.ndarray,
    scale_policy: ScalePolicy = ScalePolicy.PERCENTILE_999,
    fixed_scale: Optional[float] = None,
) -> Tuple[np.ndarray, float]:
    """
    Quantize non-negative amplitudes to int16

    Args:
        pixels: Finite, non-negative values
        scale_policy: PERCENTILE_999 maps the 99.9th percentile to 0.9 x 32767;
            FIXED uses fixed_scale, or maps the peak to 32767 when none is given
        fixed_scale: Scale for the FIXED policy

    Returns:
        Tuple of (int16 values, scale) with value = round(pixel / scale) clipped to [0, 32767]
    """
    pixels = np.asarray(pixels, dtype=float)
    if not np.all(np.isfinite(pixels)) or np.any(pixels < 0):
        raise ValidationError("quantization input must be finite and non-negative", field="pixels")
    policy = ScalePolicy(scale_policy)
    if policy == ScalePolicy.FIXED and fixed_scale is not None:
        if not fixed_scale > 0:
            raise ValidationError("fixed scale must be positive", field="fixed_scale")
        scale = float(fixed_scale)
    else:
        if policy == ScalePolicy.FIXED:
            reference = float(pixels.max()) if pixels.size else 0.0
            scale = reference / INT16_MAX
        else:
            reference = float(np.percentile(pixels, 99.9)) if pixels.size else 0.0
            scale = reference / (PERCENTILE_HEADROOM * INT16_MAX)
        if scale == 0.0:
            logger.warning("All-zero quantization input; scale set to 1")
            scale = 1.0
    values = np.clip(np.rint(pixels / scale), 0, INT16_MAX).astype(np.int16)
    return values, scale


def clipped_fraction(pixels: np.ndarray, scale: float) -> float:
    return float(np.mean(np.rint(np.asarray(pixels) / scale) > INT16_MAX)) if np.size(pixels) else 0.0


def saturation_scale(pixels: np.ndarray, max_fraction: float = MAX_CLIP_FRACTION) -> float:
    """Smallest scale that clips at most max_fraction of the pixels"""
    flat = np.ravel(np.asarray(pixels, dtype=float))
    if flat.size == 0:
        return 1.0
    allowed = int(math.floor(flat.size * max_fraction))
    reference = float(np.partition(flat, flat.size - 1 - allowed)[flat.size - 1 - allowed])
    return reference / INT16_MAX if reference > 0 else 1.0


def form_grd(
    slc: SLCProduct,
    target_spacing: float,
    window: WindowSpec,
    geom: AcquisitionGeometry,
    azimuth_spacing: Optional[float] = None,
    resolution: Optional[float] = None,
    scale_policy: ScalePolicy = ScalePolicy.PERCENTILE_999,
    fixed_scale: Optional[float] = None,
    resampler: Resampler = Resampler.CUBIC,
) -> GRDProduct:
    """
    Ground-range detected product from an SLC

    Windowed sub-look multilooking, detection, sin(incidence) area scaling,
    projection onto an equidistant ground grid, square root and int16
    quantization.

    Args:
        slc: Input SLC
        target_spacing: Ground-range pixel spacing (m)
        window: Sub-look window (PSLR target <= -17 dB)
        geom: Acquisition geometry
        azimuth_spacing: Azimuth pixel spacing (m); defaults to target_spacing
        resolution: Target -3 dB ground resolution; defaults to the mode's product value
        scale_policy: Quantization policy
        fixed_scale: Scale for the FIXED policy
        resampler: Projection kernel

    Returns:
        GRD product

    Raises:
        SpacingUnreachableError: If the spacing undersamples the multilooked resolution
        SaturationExceededError: If more than 0.01% of pixels clip under the FIXED policy
    """
    if window.target_pslr > -17.0:
        raise ValidationError("GRD windows must target a PSLR of -17 dB or lower", field="window")
    if slc.plan is None:
        raise ValidationError("GRD formation needs the SLC collection plan", field="plan")
    meta = slc.metadata
    mode = AcquisitionMode(meta.mode)
    resolution = GRD_RESOLUTION[mode] if resolution is None else resolution
    azimuth_spacing = target_spacing if azimuth_spacing is None else azimuth_spacing
    if not (target_spacing > 0 and azimuth_spacing > 0):
        raise SpacingUnreachableError("GRD spacings must be positive")
    if target_spacing > resolution or azimuth_spacing > resolution:
        raise SpacingUnreachableError(
            f"spacing {target_spacing} x {azimuth_spacing} m undersamples {resolution} m resolution"
        )

    looks = look_counts(slc, resolution, window, meta.center_incidence)
    look_rg, look_az = look_bandwidths(meta, resolution, window, meta.center_incidence)
    rate_rg = SPEED_OF_LIGHT / (2.0 * slc.range_spacing)
    rate_az = 1.0 / meta.azimuth_time_spacing
    factors = (
        detection_factor(rate_az, min(look_az, meta.azimuth_bandwidth / looks[1])),
        detection_factor(rate_rg, min(look_rg, meta.range_bandwidth / looks[0])),
    )
    intensity = multilook_intensity(
        slc.pixels,
        range_sample_rate=rate_rg,
        range_bandwidth=meta.range_bandwidth,
        range_looks=looks[0],
        azimuth_sample_rate=rate_az,
        azimuth_bandwidth=meta.azimuth_bandwidth,
        azimuth_looks=looks[1],
        window=window,
        range_look_bandwidth=look_rg,
        azimuth_look_bandwidth=look_az,
        upsample=factors,
    )

    ground = ground_positions(slc, geom)
    n_az, n_rg = slc.pixels.shape
    # detected grid positions in SLC sample units
    fine_cols = np.arange(n_rg * factors[1]) / factors[1]
    sin_inc = np.sin(np.radians(scene_incidences(slc.plan, slc.slant_range_axis)))
    intensity = intensity * np.interp(fine_cols, np.arange(n_rg), sin_inc)[None, :]

    first = math.ceil(ground[0] / target_spacing) * target_spacing
    n_ground = int(math.floor((ground[-1] - first) / target_spacing + 1e-9)) + 1
    ground_axis = first + np.arange(n_ground) * target_spacing
    columns = np.interp(ground_axis, ground, np.arange(ground.size)) * factors[1]
    projected = resample_axis(intensity, columns, axis=1, method=resampler)

    rows = np.arange(int(math.floor((n_az - 1) * slc.azimuth_spacing / azimuth_spacing + 1e-9)) + 1)
    projected = resample_axis(projected, rows * azimuth_spacing / slc.azimuth_spacing * factors[0], axis=0,
                              method=resampler)

    amplitude = np.sqrt(np.clip(projected, 0.0, None))
    values, scale = quantize_int16(amplitude, scale_policy, fixed_scale)
    clipped = clipped_fraction(amplitude, scale)
    if clipped > MAX_CLIP_FRACTION:
        if ScalePolicy(scale_policy) == ScalePolicy.FIXED:
            raise SaturationExceededError(f"{clipped:.4%} of GRD pixels clip at 32767")
        # bright point targets: back the percentile scale off until the clip limit holds
        scale = max(scale, saturation_scale(amplitude))
        logger.warning(f"{clipped:.4%} of GRD pixels clip at the 99.9th percentile scale; "
                       f"scale raised to {scale:.4g}")
        values, scale = quantize_int16(amplitude, ScalePolicy.FIXED, scale)

    metadata = meta.model_copy(update=dict(
        product_type="GRD",
        quantization_scale=scale,
        range_spacing=target_spacing,
        azimuth_spacing=azimuth_spacing,
        azimuth_time_spacing=azimuth_spacing / meta.ground_velocity,
        pixel_area=target_spacing * azimuth_spacing,
        looks=looks,
        detection=DETECTION_RULE,
        resampler=Resampler(resampler).value,
        ground_range_first=float(ground_axis[0]),
        ground_range_definition=GROUND_RANGE_DEFINITION,
        range_window=_window_summary(window),
        azimuth_window=_window_summary(window),
    ))
    logger.info(f"Formed GRD {values.shape} at {target_spacing} m x {azimuth_spacing} m, "
                f"looks {looks}, scale {scale:.4g}")
    return GRDProduct(
        pixels=values,
        ground_spacing=target_spacing,
        azimuth_spacing=azimuth_spacing,
        looks=looks,
        metadata=metadata,
        ground_range_axis=ground_axis,
    )


def radar_brightness(dn: np.ndarray, metadata: ProductMetadata) -> np.ndarray:
    """
    Calibrated beta nought from digital numbers

    Args:
        dn: Digital numbers (GRD) or complex pixels (SLC)
        metadata: Product annotation with the calibration constant

    Returns:
        Linear beta nought K * (|dn| * scale)^2

    Raises:
        MissingCalibrationError: If no calibration constant is annotated
    """
    if metadata.calibration_constant is None or not metadata.calibration_constant > 0:
        raise MissingCalibrationError("product carries no calibration constant")
    amplitude = np.abs(np.asarray(dn, dtype=complex if np.iscomplexobj(dn) else float))
    return metadata.calibration_constant * (amplitude * metadata.quantization_scale) ** 2
