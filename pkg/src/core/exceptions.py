"""
Custom exceptions for the SAR product toolkit
"""
from typing import Optional


class SarError(Exception):
    """Base exception for toolkit errors"""
    code = "sar_error"

    def __init__(self, message: str, code: Optional[str] = None):
        if code is not None:
            self.code = code
        super().__init__(message)


class ValidationError(SarError):
    """Exception for configuration and parameter validation errors"""
    code = "validation"

    def __init__(self, message: str, field: Optional[str] = None):
        self.field = field
        super().__init__(message)


class StageError(SarError):
    """Exception raised when a pipeline stage fails"""

    def __init__(self, message: str, stage: str, code: str = "stage_failed"):
        self.stage = stage
        super().__init__(message, code=code)


# Geometry

class GeometryError(SarError):
    code = "geometry"


class NoCrossingError(GeometryError):
    """Zero-Doppler condition has no sign change inside the search window"""
    code = "no_crossing"


class AmbiguousCrossingError(GeometryError):
    """More than one broadside crossing inside the search window"""
    code = "ambiguous_crossing"


class TargetAboveSensorError(GeometryError):
    code = "target_above_sensor"


class NoIntersectionError(GeometryError):
    """Range sphere misses the (height-inflated) Earth surface"""
    code = "no_intersection"


# Signal

class SignalError(SarError):
    code = "signal"


class InvalidParamsError(SignalError):
    code = "invalid_params"


class LengthMismatchError(SignalError):
    code = "length_mismatch"


class DegenerateIncidenceError(SignalError):
    code = "degenerate_incidence"


# Raw simulation

class SimulationError(SarError):
    code = "simulation"


class TargetOutOfWindowError(SimulationError):
    code = "target_out_of_window"


class BeamMissError(SimulationError):
    code = "beam_miss"


# Focusing

class FocusError(SarError):
    code = "focus"


class ModeUnsupportedError(FocusError):
    code = "mode_unsupported"


class DopplerOverflowError(FocusError):
    code = "doppler_overflow"


class GridOutsideCollectionError(FocusError):
    code = "grid_outside_collection"


# Products

class ProductError(SarError):
    code = "product"


class WindowedInputError(ProductError):
    code = "windowed_input"


class SpacingUnreachableError(ProductError):
    code = "spacing_unreachable"


class SaturationExceededError(ProductError):
    code = "saturation_exceeded"


class MissingCalibrationError(ProductError):
    code = "missing_calibration"


# Calibration

class CalibrationError(SarError):
    code = "calibration"


class PatternOutOfDomainError(CalibrationError):
    code = "pattern_out_of_domain"


class NonInvertibleError(CalibrationError):
    code = "non_invertible"


class TooFewReflectorsError(CalibrationError):
    code = "too_few_reflectors"


class BackgroundTooHighError(CalibrationError):
    code = "background_too_high"


class RegionContaminatedError(CalibrationError):
    code = "region_contaminated"


# Quality

class QualityError(SarError):
    code = "quality"


class PeakOnEdgeError(QualityError):
    code = "peak_on_edge"


class MultiplePeaksError(QualityError):
    code = "multiple_peaks"


class NoSidelobeFoundError(QualityError):
    code = "no_sidelobe"


class SpanExceedsChipError(QualityError):
    code = "span_exceeds_chip"


class MainlobeClippedError(QualityError):
    code = "mainlobe_clipped"


class TooFewError(QualityError):
    code = "too_few"
