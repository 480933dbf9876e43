"""
Chirp generation, matched filtering, spectral windows and resolution formulas
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Tuple

import numpy as np
from scipy import constants, fft

from ..core.exceptions import (
    DegenerateIncidenceError,
    InvalidParamsError,
    LengthMismatchError,
)

logger = logging.getLogger(__name__)

SPEED_OF_LIGHT = constants.c
DEFAULT_CARRIER_FREQUENCY = 9.65e9
DEFAULT_OVERSAMPLING = 1.2
MIN_RANGE_BANDWIDTH = 40e6
MAX_RANGE_BANDWIDTH = 300e6

# 300 MHz maps to exactly 0.50 m slant resolution
RESOLUTION_KAPPA_UNIFORM = 0.5 / (SPEED_OF_LIGHT / (2.0 * MAX_RANGE_BANDWIDTH))
SINC_HALF_POWER_WIDTH = 0.8859
CENTROID_MIN_COHERENCE = 0.05


class WindowFamily(str, Enum):
    UNIFORM = "UNIFORM"
    RAISED_COSINE = "RAISED_COSINE"


@dataclass(frozen=True)
class ChirpParams:
    """
    Linear FM pulse description

    droop_db is the transmit amplitude taper at the pulse edges (0 for an ideal chirp).
    """
    bandwidth: float
    pulse_duration: float
    sample_rate: float
    carrier_frequency: float = DEFAULT_CARRIER_FREQUENCY
    chirp_sign: int = 1
    droop_db: float = 0.0

    def __post_init__(self) -> None:
        if not MIN_RANGE_BANDWIDTH <= self.bandwidth <= MAX_RANGE_BANDWIDTH:
            raise InvalidParamsError(
                f"bandwidth {self.bandwidth:.3e} Hz outside [40e6, 300e6]"
            )
        if not self.sample_rate >= 1.1 * self.bandwidth:
            raise InvalidParamsError(
                f"sample rate {self.sample_rate:.3e} Hz below 1.1 x bandwidth"
            )
        if not self.pulse_duration > 0:
            raise InvalidParamsError("pulse_duration must be positive")
        if self.chirp_sign not in (1, -1):
            raise InvalidParamsError("chirp_sign must be +1 or -1")
        if not self.carrier_frequency > 0:
            raise InvalidParamsError("carrier_frequency must be positive")
        if self.droop_db < 0:
            raise InvalidParamsError("droop_db must be non-negative")
        if self.num_samples < 2:
            raise InvalidParamsError("pulse shorter than two samples")

    @classmethod
    def with_oversampling(
        cls, bandwidth: float, pulse_duration: float, oversampling: float = DEFAULT_OVERSAMPLING, **kwargs
    ) -> "ChirpParams":
        return cls(bandwidth=bandwidth, pulse_duration=pulse_duration,
                   sample_rate=oversampling * bandwidth, **kwargs)

    @property
    def chirp_rate(self) -> float:
        return self.chirp_sign * self.bandwidth / self.pulse_duration

    @property
    def num_samples(self) -> int:
        return int(round(self.pulse_duration * self.sample_rate))

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_frequency

    @property
    def range_sample_spacing(self) -> float:
        return SPEED_OF_LIGHT / (2.0 * self.sample_rate)


@dataclass(frozen=True)
class WindowSpec:
    family: WindowFamily = WindowFamily.UNIFORM
    coefficient: float = 1.0
    target_pslr: float = -17.5

    def __post_init__(self) -> None:
        object.__setattr__(self, "family", WindowFamily(self.family))
        if self.family == WindowFamily.UNIFORM and self.coefficient != 1.0:
            raise InvalidParamsError("UNIFORM window must have coefficient 1")
        if not 0.5 <= self.coefficient <= 1.0:
            raise InvalidParamsError(f"window coefficient {self.coefficient} outside [0.5, 1]")

    @classmethod
    def uniform(cls) -> "WindowSpec":
        return cls()

    @classmethod
    def tuned(cls, target_pslr: float = -17.5) -> "WindowSpec":
        """Raised-cosine window whose coefficient meets target_pslr"""
        return cls(
            family=WindowFamily.RAISED_COSINE,
            coefficient=tune_raised_cosine(target_pslr),
            target_pslr=target_pslr,
        )

    @property
    def is_uniform(self) -> bool:
        return self.family == WindowFamily.UNIFORM


def next_pow2(n: int) -> int:
    return 1 << max(int(n) - 1, 0).bit_length()


def raised_cosine_weights(freqs: np.ndarray, bandwidth: float, coefficient: float) -> np.ndarray:
    """a0 + (1 - a0) cos(2 pi f / B), with f clipped to the band edges"""
    f = np.clip(np.asarray(freqs, dtype=float), -bandwidth / 2, bandwidth / 2)
    return coefficient + (1.0 - coefficient) * np.cos(2.0 * np.pi * f / bandwidth)


def window_weights(freqs: np.ndarray, bandwidth: float, window: WindowSpec) -> np.ndarray:
    if window.is_uniform:
        return np.ones(np.shape(freqs))
    return raised_cosine_weights(freqs, bandwidth, window.coefficient)


def spectral_centroid(data: np.ndarray, axis: int, min_coherence: float = CENTROID_MIN_COHERENCE) -> float:
    """
    Spectral centroid along one axis in cycles per sample, in [-0.5, 0.5)

    Phase of the lag-one correlation. Returns 0 when the normalized
    correlation is below min_coherence (white data has no centroid).
    """
    a = np.moveaxis(np.asarray(data), axis, -1)
    if a.shape[-1] < 2:
        return 0.0
    corr = complex(np.sum(a[..., 1:] * np.conj(a[..., :-1])))
    energy = float(np.sum(np.abs(a) ** 2))
    if energy == 0.0 or abs(corr) < min_coherence * energy:
        return 0.0
    return float(np.angle(corr) / (2.0 * np.pi))


def demodulate(data: np.ndarray, axes: Tuple[int, ...] = (0, 1)) -> np.ndarray:
    """Shift the spectrum of a 2-D block to baseband; phase at the block center is kept"""
    out = np.asarray(data, dtype=complex)
    for axis in axes:
        f = spectral_centroid(out, axis)
        if f == 0.0:
            continue
        n = out.shape[axis]
        ramp = np.exp(-2j * np.pi * f * (np.arange(n) - n // 2))
        shape = [1] * out.ndim
        shape[axis] = n
        out = out * ramp.reshape(shape)
    return out


def lfm_pulse(num_samples: int, sample_rate: float, chirp_rate: float, droop_db: float = 0.0) -> np.ndarray:
    """
    Centered linear-FM samples exp(j pi K t^2)

    Args:
        num_samples: Pulse length in samples
        sample_rate: Sample rate in Hz
        chirp_rate: FM rate K in Hz/s (0 gives a rectangular pulse)
        droop_db: Edge amplitude taper in dB

    Returns:
        Complex128 samples
    """
    n = np.arange(num_samples)
    t = (n - num_samples // 2) / sample_rate
    pulse = np.exp(1j * np.pi * chirp_rate * t * t)
    if droop_db > 0:
        duration = num_samples / sample_rate
        edge = 10.0 ** (-droop_db / 20.0)
        a0 = 0.5 * (1.0 + edge)
        pulse = pulse * (a0 + (1.0 - a0) * np.cos(2.0 * np.pi * t / duration))
    return pulse


def generate_chirp(p: ChirpParams) -> np.ndarray:
    """
    Baseband linear-FM pulse for the given parameters

    Args:
        p: Chirp parameters

    Returns:
        Unit-amplitude complex samples of length round(pulse_duration * sample_rate)
    """
    return lfm_pulse(p.num_samples, p.sample_rate, p.chirp_rate, p.droop_db)


def matched_filter_gain(p: ChirpParams) -> float:
    """Peak amplitude of a compressed unit-amplitude echo (UNIFORM window)"""
    return float(np.sum(np.abs(generate_chirp(p)) ** 2))


def apply_spectral_window(
    signal: np.ndarray, sample_rate: float, bandwidth: float, window: WindowSpec, axis: int = -1
) -> np.ndarray:
    """Multiply the spectrum of signal by the window over the given band"""
    signal = np.asarray(signal)
    if window.is_uniform:
        return signal.astype(complex, copy=True)
    n = signal.shape[axis]
    spectrum = fft.fft(signal, axis=axis)
    shape = [1] * signal.ndim
    shape[axis] = n
    weights = window_weights(fft.fftfreq(n, 1.0 / sample_rate), bandwidth, window).reshape(shape)
    return fft.ifft(spectrum * weights, axis=axis)


def matched_filter(
    signal: np.ndarray,
    p: ChirpParams,
    window: WindowSpec = WindowSpec(),
    axis: int = -1,
) -> np.ndarray:
    """
    Frequency-domain pulse compression

    The output has the input length; an echo whose pulse center sits at
    sample k compresses to a peak at sample k. FFT size is the next power
    of two at or above len(signal) + pulse length (no circular wrap).

    Args:
        signal: Complex samples (1-D, or N-D with fast time along axis)
        p: Chirp parameters of the replica
        window: Spectral weighting over the chirp band
        axis: Fast-time axis

    Returns:
        Compressed samples; peak gain for a unit echo is matched_filter_gain(p)
        times the window's mean value

    Raises:
        LengthMismatchError: If the signal is shorter than the replica
    """
    signal = np.asarray(signal)
    axis = axis % max(signal.ndim, 1)
    length = signal.shape[axis]
    replica = generate_chirp(p)
    m = replica.size
    if length < m:
        raise LengthMismatchError(f"signal length {length} shorter than replica length {m}")

    nfft = next_pow2(length + m)
    shape = [1] * signal.ndim
    shape[axis] = nfft
    filt = np.conj(fft.fft(replica, nfft))
    filt = filt * window_weights(fft.fftfreq(nfft, 1.0 / p.sample_rate), p.bandwidth, window)
    corr = fft.ifft(fft.fft(signal, nfft, axis=axis) * filt.reshape(shape), axis=axis)
    corr = np.roll(corr, m // 2, axis=axis)
    return np.take(corr, np.arange(length), axis=axis)


def _response_metrics(coefficient: float, bins: int = 512, pad: int = 64) -> Tuple[float, float]:
    """PSLR (dB) and -3 dB width (units of 1/B) of a band-limited windowed response"""
    f = (np.arange(bins) - bins / 2 + 0.5) / bins
    w = coefficient + (1.0 - coefficient) * np.cos(2.0 * np.pi * f)
    spectrum = np.zeros(bins * pad, dtype=complex)
    spectrum[:bins] = w
    h = np.abs(fft.ifft(spectrum))[: bins * pad // 2]
    h = h / h[0]

    below = np.flatnonzero(h < math.sqrt(0.5))[0]
    x0, x1 = below - 1, below
    frac = (h[x0] - math.sqrt(0.5)) / (h[x0] - h[x1])
    width = 2.0 * (x0 + frac) / pad

    rising = np.flatnonzero(np.diff(h[below:]) > 0)
    null = below + int(rising[0])
    pslr = 20.0 * math.log10(float(h[null:].max()))
    return pslr, width


@lru_cache(maxsize=None)
def tune_raised_cosine(target_pslr: float = -17.5) -> float:
    """
    Largest raised-cosine coefficient whose response PSLR meets target_pslr

    Grid search from 1.0 downward in 0.001 steps.

    Raises:
        InvalidParamsError: If no coefficient in [0.5, 1] reaches the target
    """
    for step in range(0, 501):
        a0 = round(1.0 - step * 1e-3, 3)
        pslr, _ = _response_metrics(a0)
        if pslr <= target_pslr:
            logger.debug(f"Tuned raised-cosine coefficient {a0} (PSLR {pslr:.2f} dB)")
            return a0
    raise InvalidParamsError(f"no raised-cosine coefficient reaches PSLR {target_pslr} dB")


@lru_cache(maxsize=None)
def window_pslr(coefficient: float) -> float:
    return _response_metrics(coefficient)[0]


@lru_cache(maxsize=None)
def window_broadening(window: WindowSpec) -> float:
    """Measured -3 dB mainlobe broadening of the window relative to UNIFORM"""
    if window.is_uniform:
        return 1.0
    return _response_metrics(window.coefficient)[1] / _response_metrics(1.0)[1]


def resolution_kappa(window: WindowSpec) -> float:
    return RESOLUTION_KAPPA_UNIFORM * window_broadening(window)


def slant_resolution(bandwidth: float, window: WindowSpec = WindowSpec()) -> float:
    """
    Slant-range resolution kappa(window) * c / (2 B)

    Args:
        bandwidth: Range bandwidth in Hz
        window: Range window

    Returns:
        Resolution in meters
    """
    if not bandwidth > 0:
        raise InvalidParamsError("bandwidth must be positive")
    return resolution_kappa(window) * SPEED_OF_LIGHT / (2.0 * bandwidth)


def ground_resolution(slant_res: float, incidence: float) -> float:
    """
    Project a slant-range resolution to the ground

    Raises:
        DegenerateIncidenceError: If incidence is not strictly between 0 and 90 degrees
    """
    if not 0.0 < incidence <= 90.0:
        raise DegenerateIncidenceError(f"incidence {incidence} deg is degenerate")
    if incidence == 90.0:
        return float(slant_res)
    return float(slant_res / math.sin(math.radians(incidence)))
