"""
Serializable product metadata and report models
"""
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, Field, field_validator


class ProductMetadata(BaseModel):
    """Annotation carried by every SLC and GRD product"""
    product_type: str = Field(..., description="SLC or GRD")
    mode: str = Field(..., description="STRIPMAP or SPOTLIGHT")
    look_side: str = Field(..., description="LEFT or RIGHT")
    calibration_constant: Optional[float] = Field(default=None, gt=0.0, description="Absolute calibration constant K")
    quantization_scale: float = Field(default=1.0, gt=0.0, description="Digital number to amplitude scale")
    scene_height: float = Field(default=0.0, description="Reference height above the ellipsoid (m)")
    center_incidence: float = Field(..., ge=0.0, lt=90.0, description="Scene center incidence (deg)")
    incidence_near: float = Field(..., ge=0.0, lt=90.0)
    incidence_far: float = Field(..., ge=0.0, lt=90.0)
    slant_range_first: float = Field(..., gt=0.0, description="Slant range of the first column (m)")
    azimuth_time_first: float = Field(..., description="Zero-Doppler time of the first row (s)")
    azimuth_time_spacing: float = Field(..., gt=0.0, description="Row spacing in zero-Doppler time (s)")
    range_spacing: float = Field(..., gt=0.0, description="Column spacing, slant (SLC) or ground (GRD) (m)")
    azimuth_spacing: float = Field(..., gt=0.0, description="Row spacing on the ground (m)")
    pixel_area: float = Field(..., gt=0.0, description="Area of one pixel on its product grid (m^2)")
    range_bandwidth: float = Field(..., gt=0.0)
    azimuth_bandwidth: float = Field(..., gt=0.0)
    prf: float = Field(..., gt=0.0)
    sample_rate: float = Field(..., gt=0.0)
    wavelength: float = Field(..., gt=0.0)
    ground_velocity: float = Field(..., gt=0.0)
    range_window: Dict[str, Any] = Field(default_factory=dict)
    azimuth_window: Dict[str, Any] = Field(default_factory=dict)
    looks: Tuple[int, int] = Field(default=(1, 1), description="(range, azimuth) look counts")
    detection: Optional[str] = Field(default=None, description="Detection rule for GRD pixels")
    resampler: Optional[str] = Field(default=None)
    ground_range_first: Optional[float] = Field(default=None, description="Ground range of the first GRD column (m)")
    ground_range_definition: Optional[str] = Field(
        default=None, description="ARC_LENGTH: ground range is surface arc length from nadir"
    )
    compensations: List[str] = Field(default_factory=list, description="Applied gain corrections in order")
    processor_version: str = Field(..., description="Processor version string")

    @field_validator("product_type")
    @classmethod
    def validate_product_type(cls, v: str) -> str:
        if v not in ("SLC", "GRD"):
            raise ValueError("product_type must be SLC or GRD")
        return v


class IRFReport(BaseModel):
    """Impulse response measurements of one point target"""
    target: str = Field(default="", description="Target name")
    peak_position: Tuple[float, float] = Field(..., description="Sub-pixel peak (azimuth, range) in pixels")
    peak_power: float = Field(..., ge=0.0, description="Peak power (linear)")
    resolution_range: float = Field(..., gt=0.0, description="Range resolution (m)")
    resolution_azimuth: float = Field(..., gt=0.0, description="Azimuth resolution (m)")
    resolution_convention: str = Field(default="HALF_POWER")
    pslr_range: float = Field(..., le=0.0, description="Range PSLR (dB)")
    pslr_azimuth: float = Field(..., le=0.0, description="Azimuth PSLR (dB)")
    islr_range: float = Field(..., description="Range ISLR (dB)")
    islr_azimuth: float = Field(..., description="Azimuth ISLR (dB)")
    islr_mainlobe: str = Field(default="FIRST_NULL")
    integrated_energy: Optional[float] = Field(default=None, ge=0.0)


class StatSummary(BaseModel):
    mean: float
    std: float
    count: int = Field(..., ge=1)

    def formatted(self, digits: int = 2) -> str:
        return f"{self.mean:.{digits}f} ± {self.std:.{digits}f}"


class QualityReport(BaseModel):
    """Population statistics over many IRF reports"""
    count: int = Field(..., ge=1)
    resolution_range: StatSummary
    resolution_azimuth: StatSummary
    pslr_range: StatSummary
    pslr_azimuth: StatSummary
    islr_range: StatSummary
    islr_azimuth: StatSummary
    relative_radiometric_accuracy_db: Optional[float] = None
    absolute_radiometric_error_db: Optional[float] = None

    def table(self) -> List[Tuple[str, str]]:
        rows = [
            ("Range resolution [m]", self.resolution_range.formatted()),
            ("Azimuth resolution [m]", self.resolution_azimuth.formatted()),
            ("Range PSLR [dB]", self.pslr_range.formatted()),
            ("Azimuth PSLR [dB]", self.pslr_azimuth.formatted()),
            ("Range ISLR [dB]", self.islr_range.formatted()),
            ("Azimuth ISLR [dB]", self.islr_azimuth.formatted()),
        ]
        if self.relative_radiometric_accuracy_db is not None:
            rows.append(("Relative radiometric accuracy [dB]", f"{self.relative_radiometric_accuracy_db:.2f}"))
        if self.absolute_radiometric_error_db is not None:
            rows.append(("Absolute radiometric error [dB]", f"{self.absolute_radiometric_error_db:.2f}"))
        return rows


class ChipCalibration(BaseModel):
    target: str = ""
    rcs: float = Field(..., gt=0.0)
    integrated_energy: float
    background: float
    constant: float = Field(..., gt=0.0)


class CalibrationReport(BaseModel):
    constant: float = Field(..., gt=0.0, description="Geometric-mean calibration constant")
    constant_db: float
    residual_std_db: float = Field(..., ge=0.0)
    chips: List[ChipCalibration] = Field(default_factory=list)
    reference_constant: Optional[float] = Field(default=None, description="Radar-equation constant for uniform windows")


class NoiseReport(BaseModel):
    nesz_db: float
    theoretical_nesz_db: Optional[float] = None
    floor: bool = Field(default=False, description="True when the region held no power")
    region_pixels: int = Field(..., ge=0)


class AmbiguityReport(BaseModel):
    aasr_db: float
    rasr_db: float
    aasr_simulated_db: Optional[float] = None
    rasr_orders_db: Dict[str, float] = Field(default_factory=dict)


class ManifestEntry(BaseModel):
    path: str
    sha256: str
    kind: str = Field(..., description="raw, image, product, report or plot")


class RunManifest(BaseModel):
    """Record of one CLI run"""
    command: str
    scenario: str
    seed: int
    status: str = Field(default="ok")
    exit_code: int = Field(default=0)
    error_code: Optional[str] = None
    error_message: Optional[str] = None
    stages: List[str] = Field(default_factory=list)
    outputs: List[ManifestEntry] = Field(default_factory=list)
    processor_version: str
