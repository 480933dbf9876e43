"""
Scenario configuration
One JSON file per scenario, validated with pydantic and translated into the
processing modules' domain objects.
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, Field, ValidationError as PydanticValidationError, field_validator, model_validator

from ..core.exceptions import ValidationError
from ..processing.calibration import CompensationChain, Correction
from ..processing.focus import FocusAlgorithm, FocusConfig, ImageGrid, scene_grid, spotlight_azimuth_resolution
from ..processing.geometry import (
    INCIDENCE_LIMITS,
    AcquisitionGeometry,
    AcquisitionMode,
    EarthEllipsoid,
    LookSide,
    OrbitModel,
    propagate_orbit,
    zero_doppler_ground_point,
)
from ..processing.products import GRD_SPACING, Resampler, ScalePolicy
from ..processing.quality import MainlobePolicy, ResolutionConvention
from ..processing.rawsim import (
    AntennaModel,
    CollectionPlan,
    NoiseSettings,
    PerturbationBudget,
    PointTarget,
    SteeringLaw,
    SteeringMode,
    scene_reference,
    stripmap_dwell,
)
from ..processing.signal import ChirpParams, WindowFamily, WindowSpec

logger = logging.getLogger(__name__)

STAGE_ORDER = ("simulate", "focus", "slc", "grd", "analyze", "calibrate", "nesz", "ambiguity", "report")
APERTURE_MARGIN = 1.2


class GeometrySection(BaseModel):
    """Orbit, look geometry and reference surface"""
    height: float = Field(default=570e3, ge=300e3, le=1000e3, description="Orbit height at the equator (m)")
    inclination: float = Field(default=97.69, ge=0.0, le=180.0, description="Orbit inclination (deg)")
    ascending_node: float = Field(default=0.0, description="Right ascension of the ascending node (rad)")
    phase: float = Field(default=0.0, description="Argument of latitude at epoch (rad)")
    look_side: LookSide = LookSide.RIGHT
    mode: AcquisitionMode = AcquisitionMode.STRIPMAP
    center_incidence: float = Field(default=25.0, description="Scene center incidence (deg)")
    scene_height: float = Field(default=0.0, description="Scene height above the ellipsoid (m)")
    ellipsoid: Literal["WGS84", "SPHERE"] = "WGS84"

    @model_validator(mode="after")
    def check_incidence(self) -> "GeometrySection":
        low, high = INCIDENCE_LIMITS[self.mode]
        if not low <= self.center_incidence <= high:
            raise ValueError(f"{self.mode.value} incidence must lie in [{low}, {high}] deg")
        return self


class ChirpSection(BaseModel):
    bandwidth: float = Field(default=300e6, ge=40e6, le=300e6, description="Chirp bandwidth (Hz)")
    pulse_duration: float = Field(default=10e-6, gt=0.0, le=100e-6, description="Pulse length (s)")
    oversampling: float = Field(default=1.2, ge=1.1, le=4.0, description="Sample rate over bandwidth")
    carrier_frequency: float = Field(default=9.65e9, gt=0.0)
    droop_db: float = Field(default=0.0, ge=0.0, le=6.0)


class PlanSection(BaseModel):
    """Pulse timing, power and steering"""
    prf: float = Field(default=4500.0, ge=2000.0, le=10000.0, description="Pulse repetition frequency (Hz)")
    duration: Optional[float] = Field(default=None, gt=0.0, description="Collection length (s); sized automatically when omitted")
    azimuth_resolution: Optional[float] = Field(default=None, ge=0.2, le=1.0, description="Spotlight azimuth resolution target (m)")
    tx_power: float = Field(default=4000.0, gt=0.0, description="Peak transmit power (W)")
    rx_gain: float = Field(default=0.0, description="Receiver gain (dB)")
    duty_cycle: Optional[float] = Field(default=None, gt=0.0, le=0.5)
    gain_offset_db: float = Field(default=0.0, description="Unknown gain drift (dB)")


class AntennaSection(BaseModel):
    length_azimuth: float = Field(default=3.2, gt=0.0)
    height_elevation: float = Field(default=0.4, gt=0.0)
    boresight_elevation: Optional[float] = Field(default=None, ge=0.0, lt=90.0)
    peak_gain: Optional[float] = None
    pointing_error: float = Field(default=0.0, description="Elevation pointing error (deg)")


class TargetSpec(BaseModel):
    """Point target placed relative to the scene center"""
    name: str = ""
    azimuth_offset: float = Field(default=0.0, description="Along-track offset (m)")
    range_offset: float = Field(default=0.0, description="Slant-range offset (m)")
    rcs: float = Field(default=1.0e4, gt=0.0, description="Radar cross section (m^2)")


class TargetGrid(BaseModel):
    rows: int = Field(default=3, ge=1, le=5)
    cols: int = Field(default=3, ge=1, le=5)
    azimuth_step: float = Field(default=150.0, gt=0.0, description="Along-track spacing (m)")
    range_step: float = Field(default=150.0, gt=0.0, description="Slant-range spacing (m)")
    rcs: float = Field(default=1.0e4, gt=0.0)


class NoiseSection(BaseModel):
    enabled: bool = False
    noise_figure_db: float = Field(default=3.0, ge=0.0)
    system_temperature: float = Field(default=290.0, gt=0.0)
    losses_db: float = Field(default=1.0, ge=0.0)


class WindowSection(BaseModel):
    family: WindowFamily = WindowFamily.UNIFORM
    coefficient: Optional[float] = Field(default=None, ge=0.5, le=1.0)
    target_pslr: float = Field(default=-17.5, lt=-13.26)

    def build(self) -> WindowSpec:
        if self.family == WindowFamily.UNIFORM:
            return WindowSpec.uniform()
        if self.coefficient is None:
            return WindowSpec.tuned(self.target_pslr)
        return WindowSpec(family=self.family, coefficient=self.coefficient, target_pslr=self.target_pslr)


class FocusSection(BaseModel):
    algorithm: FocusAlgorithm = FocusAlgorithm.RANGE_DOPPLER
    processed_doppler_bandwidth: float = Field(default=2700.0, gt=0.0)
    rcmc_kernel_taps: int = Field(default=8, ge=4)
    equalize_azimuth_pattern: bool = True
    range_window: WindowSection = Field(default_factory=WindowSection)
    azimuth_window: WindowSection = Field(default_factory=WindowSection)
    grid_size: Tuple[int, int] = Field(default=(256, 256), description="Back-projection grid (azimuth, range)")
    grid_spacing: Optional[Tuple[float, float]] = Field(default=None, description="Back-projection spacing (azimuth, range) in m")


class ProductSection(BaseModel):
    grd_spacing: Optional[float] = Field(default=None, gt=0.0, description="GRD pixel spacing (m); mode default when omitted")
    grd_resolution: Optional[float] = Field(default=None, gt=0.0)
    grd_window: WindowSection = Field(
        default_factory=lambda: WindowSection(family=WindowFamily.RAISED_COSINE, target_pslr=-17.5)
    )
    scale_policy: ScalePolicy = ScalePolicy.PERCENTILE_999
    fixed_scale: Optional[float] = Field(default=None, gt=0.0)
    resampler: Resampler = Resampler.CUBIC
    compensations: List[Correction] = Field(default_factory=list)
    calibration_constant: Optional[float] = Field(default=None, gt=0.0)


class QualitySection(BaseModel):
    chip_size: int = Field(default=64, ge=16)
    oversample: int = Field(default=32, ge=16)
    convention: ResolutionConvention = ResolutionConvention.HALF_POWER
    mainlobe_policy: MainlobePolicy = MainlobePolicy.K_TIMES_RES
    plots: bool = True


class CalibrationSection(BaseModel):
    reference_range: float = Field(default=600e3, gt=0.0)
    noise_region: Optional[Tuple[int, int, int, int]] = Field(
        default=None, description="SLC window (row0, row1, col0, col1) for NESZ"
    )
    perturbations: Dict[str, float] = Field(default_factory=dict, description="PerturbationBudget one-sigma values")


class ScenarioConfig(BaseModel):
    """A complete simulation and processing scenario"""
    name: str = "scenario"
    seed: int = Field(default=0, ge=0)
    output_dir: str = "runs/scenario"
    geometry: GeometrySection = Field(default_factory=GeometrySection)
    chirp: ChirpSection = Field(default_factory=ChirpSection)
    plan: PlanSection = Field(default_factory=PlanSection)
    antenna: AntennaSection = Field(default_factory=AntennaSection)
    targets: List[TargetSpec] = Field(default_factory=list)
    target_grid: Optional[TargetGrid] = None
    noise: NoiseSection = Field(default_factory=NoiseSection)
    focus: FocusSection = Field(default_factory=FocusSection)
    product: ProductSection = Field(default_factory=ProductSection)
    quality: QualitySection = Field(default_factory=QualitySection)
    calibration: CalibrationSection = Field(default_factory=CalibrationSection)
    stages: List[str] = Field(default_factory=lambda: ["simulate", "focus", "slc", "grd", "analyze", "report"])

    @field_validator("stages")
    @classmethod
    def validate_stages(cls, v: List[str]) -> List[str]:
        unknown = [s for s in v if s not in STAGE_ORDER]
        if unknown:
            raise ValueError(f"unknown stages {unknown}; choose from {list(STAGE_ORDER)}")
        return [s for s in STAGE_ORDER if s in v]

    @model_validator(mode="after")
    def check_consistency(self) -> "ScenarioConfig":
        if len(self.targets) + (self.target_grid.rows * self.target_grid.cols if self.target_grid else 0) > 25:
            raise ValueError("at most 25 point targets per scenario")
        if self.product.scale_policy == ScalePolicy.PERCENTILE_999 and self.product.fixed_scale is not None:
            raise ValueError("fixed_scale only applies to FIXED quantization")
        duty = self.plan.duty_cycle if self.plan.duty_cycle is not None else self.chirp.pulse_duration * self.plan.prf
        if duty > 0.5:
            raise ValueError(f"duty cycle {duty:.3f} exceeds 0.5")
        return self

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ScenarioConfig":
        """
        Validate a scenario dictionary

        Raises:
            ValidationError: With every pydantic error message joined
        """
        try:
            return cls.model_validate(data)
        except PydanticValidationError as e:
            messages = "; ".join(
                f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()
            )
            raise ValidationError(f"invalid scenario: {messages}", field="scenario") from e

    @classmethod
    def from_file(cls, file_path: str) -> "ScenarioConfig":
        """Load a scenario from a JSON file"""
        path = Path(file_path)
        if not path.exists():
            raise ValidationError(f"Scenario file not found: {file_path}", field="config_path")
        try:
            with open(path, "r") as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise ValidationError(f"Scenario file is not valid JSON: {e}", field="config_path") from e
        return cls.from_dict(data)


def build_geometry(scenario: ScenarioConfig) -> AcquisitionGeometry:
    g = scenario.geometry
    if g.ellipsoid == "SPHERE":
        ellipsoid = EarthEllipsoid.sphere(EarthEllipsoid().semi_major_axis, EarthEllipsoid().rotation_rate)
    else:
        ellipsoid = EarthEllipsoid()
    orbit = OrbitModel(
        height_at_equator=g.height,
        inclination=g.inclination,
        ascending_node=g.ascending_node,
        phase=g.phase,
        ellipsoid=ellipsoid,
    )
    return AcquisitionGeometry(orbit, g.look_side, g.mode, g.center_incidence, g.scene_height)


def build_chirp(scenario: ScenarioConfig) -> ChirpParams:
    c = scenario.chirp
    return ChirpParams.with_oversampling(
        c.bandwidth, c.pulse_duration, c.oversampling,
        carrier_frequency=c.carrier_frequency, droop_db=c.droop_db,
    )


def _target_extent(scenario: ScenarioConfig) -> float:
    offsets = [abs(t.azimuth_offset) for t in scenario.targets]
    if scenario.target_grid is not None:
        grid = scenario.target_grid
        offsets.append(0.5 * (grid.rows - 1) * grid.azimuth_step)
    return max(offsets, default=0.0)


def build_plan(scenario: ScenarioConfig) -> CollectionPlan:
    """
    Collection plan of a scenario

    Without an explicit duration, Stripmap collections cover the processed
    aperture of every target plus a margin, and Spotlight collections are
    sized to reach the requested azimuth resolution (0.5 m by default).
    """
    geom = build_geometry(scenario)
    p = scenario.plan
    spot = geom.mode == AcquisitionMode.SPOTLIGHT
    steering = SteeringLaw(SteeringMode.SPOT) if spot else SteeringLaw(SteeringMode.FIXED)
    a = scenario.antenna
    noise = scenario.noise
    plan = CollectionPlan(
        geom=geom,
        chirp=build_chirp(scenario),
        prf=p.prf,
        start=-0.5,
        stop=0.5,
        steering=steering,
        tx_power=p.tx_power,
        rx_gain=p.rx_gain,
        duty_cycle=p.duty_cycle,
        antenna=AntennaModel(a.length_azimuth, a.height_elevation, a.boresight_elevation, a.peak_gain, a.pointing_error),
        noise=NoiseSettings(noise.enabled, noise.noise_figure_db, noise.system_temperature, noise.losses_db),
        gain_offset_db=p.gain_offset_db,
        seed=scenario.seed,
    )
    if p.duration is not None:
        duration = p.duration
    elif spot:
        target = p.azimuth_resolution if p.azimuth_resolution is not None else 0.5
        duration = spotlight_azimuth_resolution(plan) / target
    else:
        ref = scene_reference(plan)
        aperture = scenario.focus.processed_doppler_bandwidth * plan.wavelength * ref.slant_range / (
            2.0 * ref.state.speed * ref.ground_velocity
        )
        duration = APERTURE_MARGIN * max(aperture, stripmap_dwell(plan)) + 2.0 * _target_extent(scenario) / ref.ground_velocity
    plan = plan.with_updates(start=-0.5 * duration, stop=0.5 * duration)
    logger.info(f"Plan: {plan.num_pulses} pulses at {plan.prf:.0f} Hz over {duration:.3f} s")
    return plan


def build_targets(scenario: ScenarioConfig, plan: CollectionPlan) -> List[PointTarget]:
    """Point targets placed at their zero-Doppler geometry around the scene center"""
    ref = scene_reference(plan)
    geom = plan.geom
    specs = list(scenario.targets)
    if scenario.target_grid is not None:
        grid = scenario.target_grid
        for i in range(grid.rows):
            for j in range(grid.cols):
                specs.append(TargetSpec(
                    name=f"CR{i + 1}{j + 1}",
                    azimuth_offset=(i - 0.5 * (grid.rows - 1)) * grid.azimuth_step,
                    range_offset=(j - 0.5 * (grid.cols - 1)) * grid.range_step,
                    rcs=grid.rcs,
                ))
    if not specs:
        specs.append(TargetSpec(name="CR1"))
    targets = []
    for k, spec in enumerate(specs):
        state = propagate_orbit(geom.orbit, ref.time + spec.azimuth_offset / ref.ground_velocity)
        position = zero_doppler_ground_point(
            state, ref.slant_range + spec.range_offset, geom.look_side, geom.orbit.ellipsoid, geom.scene_height
        )
        targets.append(PointTarget(position, spec.rcs, name=spec.name or f"T{k + 1}"))
    return targets


def build_focus_config(scenario: ScenarioConfig) -> FocusConfig:
    f = scenario.focus
    algorithm = f.algorithm
    if scenario.geometry.mode == AcquisitionMode.SPOTLIGHT:
        algorithm = FocusAlgorithm.BACKPROJECTION
    return FocusConfig(
        processed_doppler_bandwidth=f.processed_doppler_bandwidth,
        rcmc_kernel_taps=f.rcmc_kernel_taps,
        algorithm=algorithm,
        azimuth_window=f.azimuth_window.build(),
        range_window=f.range_window.build(),
        equalize_azimuth_pattern=f.equalize_azimuth_pattern,
    )


def build_grid(scenario: ScenarioConfig, plan: CollectionPlan) -> Optional[ImageGrid]:
    """Back-projection grid, or None when range-Doppler processing is used"""
    if build_focus_config(scenario).algorithm != FocusAlgorithm.BACKPROJECTION:
        return None
    n_az, n_rg = scenario.focus.grid_size
    spacing = scenario.focus.grid_spacing
    return scene_grid(
        plan, n_az, n_rg,
        azimuth_spacing=spacing[0] if spacing else None,
        range_spacing=spacing[1] if spacing else None,
    )


def build_compensation_chain(scenario: ScenarioConfig) -> CompensationChain:
    corrections = tuple(scenario.product.compensations)
    if not corrections:
        return CompensationChain.identity()
    return CompensationChain(corrections=corrections, reference_range=scenario.calibration.reference_range)


def build_perturbation_budget(scenario: ScenarioConfig) -> PerturbationBudget:
    try:
        return PerturbationBudget(**scenario.calibration.perturbations)
    except TypeError as e:
        raise ValidationError(f"unknown perturbation: {e}", field="calibration.perturbations") from e


def grd_spacing(scenario: ScenarioConfig) -> float:
    spacing = scenario.product.grd_spacing
    return GRD_SPACING[scenario.geometry.mode] if spacing is None else spacing


def scenario_schema() -> Dict[str, Any]:
    """JSON schema of the scenario file"""
    return ScenarioConfig.model_json_schema()


def scenario_summary(scenario: ScenarioConfig) -> Dict[str, Any]:
    return {
        "name": scenario.name,
        "mode": scenario.geometry.mode.value,
        "bandwidth_mhz": scenario.chirp.bandwidth / 1e6,
        "prf": scenario.plan.prf,
        "incidence": scenario.geometry.center_incidence,
        "targets": len(scenario.targets) + (
            scenario.target_grid.rows * scenario.target_grid.cols if scenario.target_grid else 0
        ),
        "seed": scenario.seed,
        "grd_spacing": grd_spacing(scenario),
    }
