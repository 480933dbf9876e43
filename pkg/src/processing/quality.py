"""
Impulse response quality
Chip extraction with spectral oversampling, PSLR/ISLR/resolution
measurement along the grid axes, integrated energy and population
statistics.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import fft, integrate, optimize

from ..core.exceptions import (
    BackgroundTooHighError,
    MainlobeClippedError,
    MultiplePeaksError,
    NoSidelobeFoundError,
    PeakOnEdgeError,
    SpanExceedsChipError,
    TooFewError,
    ValidationError,
)
from ..core.models import IRFReport, QualityReport, StatSummary
from .signal import RESOLUTION_KAPPA_UNIFORM, SINC_HALF_POWER_WIDTH, demodulate

logger = logging.getLogger(__name__)

MIN_OVERSAMPLE = 16
DEFAULT_OVERSAMPLE = 32
DEFAULT_CHIP_SIZE = 64
ISLR_SPAN_CELLS = 10.0
ISLR_REFERENCE_DB = -5.03
RATIO_FLOOR_DB = -100.0
SECONDARY_PEAK_DB = -10.0
BACKGROUND_LIMIT_DB = -30.0


class Axis(str, Enum):
    RANGE = "RANGE"
    AZIMUTH = "AZIMUTH"


class MainlobePolicy(str, Enum):
    FIRST_NULL = "FIRST_NULL"
    K_TIMES_RES = "K_TIMES_RES"


class ResolutionConvention(str, Enum):
    HALF_POWER = "HALF_POWER"
    NOMINAL = "NOMINAL"


@dataclass(frozen=True, eq=False)
class IRFChip:
    """
    Point-target chip; rows are azimuth, columns range

    pixels is the original-resolution chip centered on the peak pixel;
    oversampled is the spectrally interpolated chip with the peak at its
    center sample.
    """
    pixels: np.ndarray
    oversampled: np.ndarray
    range_spacing: float
    azimuth_spacing: float
    oversample_factor: int
    peak_position: Tuple[float, float]
    name: str = ""

    def __post_init__(self) -> None:
        if self.oversample_factor < MIN_OVERSAMPLE:
            raise ValidationError(
                f"oversample factor {self.oversample_factor} below {MIN_OVERSAMPLE}", field="oversample"
            )

    @property
    def center(self) -> Tuple[int, int]:
        return self.oversampled.shape[0] // 2, self.oversampled.shape[1] // 2

    def transposed(self) -> "IRFChip":
        return IRFChip(
            pixels=self.pixels.T,
            oversampled=self.oversampled.T,
            range_spacing=self.azimuth_spacing,
            azimuth_spacing=self.range_spacing,
            oversample_factor=self.oversample_factor,
            peak_position=(self.peak_position[1], self.peak_position[0]),
            name=self.name,
        )

    def cut(self, axis: Axis) -> Tuple[np.ndarray, float]:
        """Normalized power cut through the peak and its sample spacing in meters"""
        row, col = self.center
        if Axis(axis) == Axis.RANGE:
            values = self.oversampled[row, :]
            spacing = self.range_spacing / self.oversample_factor
        else:
            values = self.oversampled[:, col]
            spacing = self.azimuth_spacing / self.oversample_factor
        power = np.abs(values) ** 2
        peak = power[power.size // 2]
        return (power / peak if peak > 0 else power), spacing


def oversample_chip(chip: np.ndarray, factor: int) -> np.ndarray:
    """Zero-padded 2-D spectral interpolation by an integer factor"""
    n_az, n_rg = chip.shape
    spectrum = fft.fftshift(fft.fft2(chip))
    padded = np.zeros((n_az * factor, n_rg * factor), dtype=complex)
    r0 = (n_az * factor - n_az) // 2
    c0 = (n_rg * factor - n_rg) // 2
    padded[r0:r0 + n_az, c0:c0 + n_rg] = spectrum
    return fft.ifft2(fft.ifftshift(padded)) * factor * factor


def _quadratic_peak(block: np.ndarray) -> Tuple[float, float]:
    """Sub-sample offset of the maximum of a 3x3 block by a least-squares quadratic surface"""
    yy, xx = np.mgrid[-1:2, -1:2]
    x, y, z = xx.ravel(), yy.ravel(), block.ravel()
    design = np.stack([np.ones(9), x, y, x * x, y * y, x * y], axis=1)
    c, *_ = np.linalg.lstsq(design, z, rcond=None)
    hessian = np.array([[2 * c[4], c[5]], [c[5], 2 * c[3]]])
    grad = np.array([c[2], c[1]])
    try:
        dy, dx = -np.linalg.solve(hessian, grad)
    except np.linalg.LinAlgError:
        return 0.0, 0.0
    return float(np.clip(dy, -1, 1)), float(np.clip(dx, -1, 1))


def extract_irf_from_array(
    image: np.ndarray,
    approx_peak: Tuple[int, int],
    range_spacing: float,
    azimuth_spacing: float,
    chip_size: int = DEFAULT_CHIP_SIZE,
    oversample: int = DEFAULT_OVERSAMPLE,
    name: str = "",
) -> IRFChip:
    """
    Cut, oversample and re-center a point-target chip from a 2-D image

    The chip is shifted to baseband in both axes before spectral
    interpolation; pixels keep the original samples.

    Raises:
        PeakOnEdgeError: If the chip would leave the image
        MultiplePeaksError: If a second response above -10 dB sits off the sidelobe cross
    """
    if oversample < MIN_OVERSAMPLE:
        raise ValidationError(f"oversample factor {oversample} below {MIN_OVERSAMPLE}", field="oversample")
    image = np.asarray(image)
    n_az, n_rg = image.shape
    r, c = int(round(approx_peak[0])), int(round(approx_peak[1]))
    lo_r, hi_r = max(r - 2, 0), min(r + 3, n_az)
    lo_c, hi_c = max(c - 2, 0), min(c + 3, n_rg)
    local = np.abs(image[lo_r:hi_r, lo_c:hi_c])
    dr, dc = np.unravel_index(int(np.argmax(local)), local.shape)
    r, c = lo_r + int(dr), lo_c + int(dc)

    half = chip_size // 2
    if r - half < 0 or c - half < 0 or r + half > n_az or c + half > n_rg:
        raise PeakOnEdgeError(f"peak at ({r}, {c}) too close to the image edge for a {chip_size} chip")
    chip = image[r - half:r + half, c - half:c + half]

    power = np.abs(chip) ** 2
    peak = power[half, half]
    rows, cols = np.indices(power.shape)
    off_cross = (np.abs(rows - half) > 3) & (np.abs(cols - half) > 3)
    if peak > 0 and np.any(power[off_cross] > peak * 10 ** (SECONDARY_PEAK_DB / 10)):
        raise MultiplePeaksError(f"secondary response above {SECONDARY_PEAK_DB} dB in chip around ({r}, {c})")

    # zero padding assumes a baseband spectrum
    up = oversample_chip(demodulate(chip), oversample)
    up_power = np.abs(up) ** 2
    pr, pc = np.unravel_index(int(np.argmax(up_power)), up_power.shape)
    pr = int(np.clip(pr, 1, up.shape[0] - 2))
    pc = int(np.clip(pc, 1, up.shape[1] - 2))
    dy, dx = _quadratic_peak(up_power[pr - 1:pr + 2, pc - 1:pc + 2])
    centered = np.roll(up, (up.shape[0] // 2 - pr, up.shape[1] // 2 - pc), axis=(0, 1))

    peak_position = (
        r - half + (pr + dy) / oversample,
        c - half + (pc + dx) / oversample,
    )
    return IRFChip(
        pixels=chip,
        oversampled=centered,
        range_spacing=range_spacing,
        azimuth_spacing=azimuth_spacing,
        oversample_factor=oversample,
        peak_position=peak_position,
        name=name,
    )


def extract_irf(
    slc,
    approx_peak: Tuple[int, int],
    chip_size: int = DEFAULT_CHIP_SIZE,
    oversample: int = DEFAULT_OVERSAMPLE,
    name: str = "",
) -> IRFChip:
    """
    Point-target chip from an SLC (or any product with pixels and spacings)

    Args:
        slc: SLC product; GRD products are accepted via their ground spacing
        approx_peak: (row, column) within two pixels of the true peak
        chip_size: Chip edge in pixels
        oversample: Spectral oversampling factor (>= 16)
        name: Target label carried into reports

    Returns:
        Oversampled, re-centered chip
    """
    range_spacing = getattr(slc, "range_spacing", None) or getattr(slc, "ground_spacing")
    return extract_irf_from_array(
        slc.pixels, approx_peak, range_spacing, slc.azimuth_spacing, chip_size, oversample, name
    )


def _walk_to_null(power: np.ndarray, start: int, step: int) -> Optional[int]:
    i = start
    while True:
        nxt = i + step
        if nxt < 0 or nxt >= power.size:
            return None
        if power[nxt] == 0.0:
            return nxt
        if power[nxt] > power[i]:
            return i
        i = nxt


def _first_nulls(power: np.ndarray) -> Tuple[int, int]:
    center = power.size // 2
    left = _walk_to_null(power, center, -1)
    right = _walk_to_null(power, center, +1)
    if left is None or right is None:
        raise NoSidelobeFoundError("cut ends before the first null")
    return left, right


def _half_power_edges(power: np.ndarray) -> Tuple[float, float]:
    center = power.size // 2
    below = np.flatnonzero(power[center:] < 0.5)
    above = np.flatnonzero(power[:center + 1][::-1] < 0.5)
    if below.size == 0 or above.size == 0:
        raise MainlobeClippedError("mainlobe does not fall below -3 dB inside the cut")
    i1 = center + int(below[0])
    right = (i1 - 1) + (power[i1 - 1] - 0.5) / (power[i1 - 1] - power[i1])
    j1 = center - int(above[0])
    left = (j1 + 1) - (power[j1 + 1] - 0.5) / (power[j1 + 1] - power[j1])
    return left, right


def measure_resolution(
    chip: IRFChip,
    axis: Axis,
    convention: ResolutionConvention = ResolutionConvention.HALF_POWER,
) -> float:
    """
    Mainlobe width along a cut through the peak

    HALF_POWER is the -3 dB full width; NOMINAL rescales it to the
    bandwidth-equivalent width (kappa * c / 2B for an unweighted response).

    Raises:
        MainlobeClippedError: If the mainlobe does not drop below -3 dB within the cut
    """
    power, spacing = chip.cut(axis)
    left, right = _half_power_edges(power)
    width = (right - left) * spacing
    if ResolutionConvention(convention) == ResolutionConvention.NOMINAL:
        width *= RESOLUTION_KAPPA_UNIFORM / SINC_HALF_POWER_WIDTH
    return float(width)


def _refined_max(power: np.ndarray, i: int) -> float:
    if 0 < i < power.size - 1:
        a, b, c = power[i - 1], power[i], power[i + 1]
        denom = a - 2 * b + c
        if denom < 0:
            delta = 0.5 * (a - c) / denom
            return float(b - 0.25 * (a - c) * delta)
    return float(power[i])


def measure_pslr(chip: IRFChip, axis: Axis) -> float:
    """
    Peak sidelobe ratio along a cut (dB)

    Raises:
        NoSidelobeFoundError: If no sidelobe peak lies beyond the first nulls
    """
    power, _ = chip.cut(axis)
    left, right = _first_nulls(power)
    center = power.size // 2
    side = np.concatenate([power[:left + 1], power[right:]])
    if side.size < 3:
        raise NoSidelobeFoundError("cut too short for sidelobes")
    candidates = []
    for lo, hi in ((0, left + 1), (right, power.size)):
        seg = power[lo:hi]
        interior = np.flatnonzero((seg[1:-1] >= seg[:-2]) & (seg[1:-1] >= seg[2:])) + 1
        candidates.extend(lo + int(i) for i in interior)
    if not candidates:
        raise NoSidelobeFoundError("no sidelobe peak beyond the first nulls")
    best = max(candidates, key=lambda i: power[i])
    main = _refined_max(power, center)
    return float(10.0 * math.log10(_refined_max(power, best) / main))


@lru_cache(maxsize=None)
def calibrate_islr_k(target_db: float = ISLR_REFERENCE_DB, span_cells: float = ISLR_SPAN_CELLS) -> float:
    """
    Mainlobe half-extent multiplier k such that an ideal sinc gives target_db

    Mainlobe is |x| <= k * w / 2 with w the -3 dB width; integration spans
    +-span_cells widths.
    """
    w = SINC_HALF_POWER_WIDTH
    span = span_cells * w

    def sinc2(x: float) -> float:
        return float(np.sinc(x) ** 2)

    total, _ = integrate.quad(sinc2, 0.0, span, limit=400)

    def residual(k: float) -> float:
        main, _ = integrate.quad(sinc2, 0.0, 0.5 * k * w, limit=200)
        return 10.0 * math.log10((total - main) / main) - target_db

    return float(optimize.brentq(residual, 0.2, 2.2, xtol=1e-10))


def measure_islr(
    chip: IRFChip,
    axis: Axis,
    mainlobe_policy: MainlobePolicy = MainlobePolicy.K_TIMES_RES,
    k: Optional[float] = None,
    span_cells: float = ISLR_SPAN_CELLS,
) -> float:
    """
    Integrated sidelobe ratio along a cut (dB)

    Args:
        chip: IRF chip
        axis: Cut direction
        mainlobe_policy: FIRST_NULL or K_TIMES_RES
        k: Mainlobe multiplier for K_TIMES_RES (default calibrate_islr_k())
        span_cells: Integration half-span in -3 dB widths

    Raises:
        SpanExceedsChipError: If the integration span leaves the cut
    """
    power, _ = chip.cut(axis)
    center = power.size // 2
    left, right = _half_power_edges(power)
    width = right - left
    half_span = span_cells * width
    if center - half_span < 0 or center + half_span > power.size - 1:
        raise SpanExceedsChipError(
            f"ISLR span of {2 * half_span:.0f} samples exceeds cut length {power.size}"
        )
    x = np.arange(power.size) - center
    in_span = np.abs(x) <= half_span
    if MainlobePolicy(mainlobe_policy) == MainlobePolicy.FIRST_NULL:
        n_left, n_right = _first_nulls(power)
        main_mask = (x >= n_left - center) & (x <= n_right - center)
    else:
        k = calibrate_islr_k(span_cells=span_cells) if k is None else k
        main_mask = np.abs(x) <= 0.5 * k * width
    main = float(np.sum(power[main_mask & in_span]))
    side = float(np.sum(power[~main_mask & in_span]))
    if side <= 0.0:
        return RATIO_FLOOR_DB
    return float(10.0 * math.log10(side / main))


def integrated_energy(chip: IRFChip, core_half: Optional[int] = None) -> Tuple[float, float]:
    """
    Background-corrected integrated energy of the original-resolution chip

    Energy is summed over a central square; the background is the mean power
    in the surrounding annulus, removed per core pixel.

    Returns:
        Tuple of (net energy, background mean power)

    Raises:
        BackgroundTooHighError: If background-to-peak exceeds -30 dB
    """
    power = np.abs(chip.pixels) ** 2
    n_az, n_rg = power.shape
    core_half = min(n_az, n_rg) // 4 if core_half is None else core_half
    ca, cr = n_az // 2, n_rg // 2
    rows, cols = np.indices(power.shape)
    core = (np.abs(rows - ca) <= core_half) & (np.abs(cols - cr) <= core_half)
    background = float(np.mean(power[~core])) if np.any(~core) else 0.0
    peak = float(power[ca, cr])
    if peak > 0 and background / peak > 10 ** (BACKGROUND_LIMIT_DB / 10):
        raise BackgroundTooHighError(
            f"background {10 * math.log10(background / peak):.1f} dB below peak exceeds "
            f"{BACKGROUND_LIMIT_DB} dB"
        )
    energy = float(np.sum(power[core])) - background * int(np.count_nonzero(core))
    return energy, background


def measure_irf(
    chip: IRFChip,
    convention: ResolutionConvention = ResolutionConvention.HALF_POWER,
    mainlobe_policy: MainlobePolicy = MainlobePolicy.K_TIMES_RES,
) -> IRFReport:
    """All IRF metrics of one chip"""
    power = np.abs(chip.oversampled[chip.center]) ** 2
    energy, _ = integrated_energy(chip)
    report = IRFReport(
        target=chip.name,
        peak_position=chip.peak_position,
        peak_power=float(power),
        resolution_range=measure_resolution(chip, Axis.RANGE, convention),
        resolution_azimuth=measure_resolution(chip, Axis.AZIMUTH, convention),
        resolution_convention=ResolutionConvention(convention).value,
        pslr_range=measure_pslr(chip, Axis.RANGE),
        pslr_azimuth=measure_pslr(chip, Axis.AZIMUTH),
        islr_range=measure_islr(chip, Axis.RANGE, mainlobe_policy),
        islr_azimuth=measure_islr(chip, Axis.AZIMUTH, mainlobe_policy),
        islr_mainlobe=MainlobePolicy(mainlobe_policy).value,
        integrated_energy=max(energy, 0.0),
    )
    logger.debug(
        f"IRF {chip.name or chip.peak_position}: res {report.resolution_range:.3f}/"
        f"{report.resolution_azimuth:.3f} m, PSLR {report.pslr_range:.2f}/{report.pslr_azimuth:.2f} dB"
    )
    return report


def _summary(values: Sequence[float]) -> StatSummary:
    arr = np.asarray(values, dtype=float)
    return StatSummary(mean=float(arr.mean()), std=float(arr.std(ddof=1)), count=int(arr.size))


def aggregate_reports(reports: Sequence[IRFReport]) -> QualityReport:
    """
    Per-metric sample mean and unbiased standard deviation

    Raises:
        TooFewError: With fewer than two reports
    """
    if len(reports) < 2:
        raise TooFewError(f"need at least 2 IRF reports, got {len(reports)}")
    return QualityReport(
        count=len(reports),
        resolution_range=_summary([r.resolution_range for r in reports]),
        resolution_azimuth=_summary([r.resolution_azimuth for r in reports]),
        pslr_range=_summary([r.pslr_range for r in reports]),
        pslr_azimuth=_summary([r.pslr_azimuth for r in reports]),
        islr_range=_summary([r.islr_range for r in reports]),
        islr_azimuth=_summary([r.islr_azimuth for r in reports]),
    )


def recovered_rcs_errors_db(
    chips: Sequence[IRFChip], true_rcs: Sequence[float], calibration_constant: float = 1.0
) -> np.ndarray:
    """Per-target 10 log10(K * E * A / rcs)"""
    if len(chips) != len(true_rcs):
        raise ValidationError("one true rcs per chip required", field="true_rcs")
    out = []
    for chip, rcs in zip(chips, true_rcs):
        energy, _ = integrated_energy(chip)
        area = chip.range_spacing * chip.azimuth_spacing
        out.append(10.0 * math.log10(calibration_constant * energy * area / rcs))
    return np.asarray(out)


def relative_radiometric_accuracy(chips: Sequence[IRFChip], true_rcs: Sequence[float]) -> float:
    """
    Standard deviation (dB) of the recovered-rcs errors within one data take

    Raises:
        TooFewError: With fewer than two chips
    """
    if len(chips) < 2:
        raise TooFewError(f"need at least 2 chips, got {len(chips)}")
    return float(np.std(recovered_rcs_errors_db(chips, true_rcs), ddof=1))


def format_table(report: QualityReport) -> str:
    rows = report.table()
    width = max(len(name) for name, _ in rows)
    lines = [f"{'Parameter'.ljust(width)}  Value", f"{'-' * width}  {'-' * 14}"]
    lines.extend(f"{name.ljust(width)}  {value}" for name, value in rows)
    return "\n".join(lines)
