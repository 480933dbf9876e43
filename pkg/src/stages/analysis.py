"""
Analysis Stages
Point-target quality, absolute calibration, noise floor and ambiguity ratios
"""
import math
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..config import get_config
from ..config.scenario import build_compensation_chain, build_focus_config
from ..core.base_stage import BaseStage
from ..core.exceptions import MissingCalibrationError, ValidationError
from ..core.models import AmbiguityReport, NoiseReport
from ..core.state import PipelineState
from ..processing.calibration import (
    NESZ_FLOOR_DB,
    estimate_aasr,
    estimate_calibration_constant,
    estimate_nesz,
    estimate_rasr,
    rasr_contributions,
    simulate_aasr,
    theoretical_calibration_constant,
    theoretical_nesz,
)
from ..processing.geometry import zero_doppler_solve
from ..processing.quality import (
    RATIO_FLOOR_DB,
    aggregate_reports,
    extract_irf,
    format_table,
    measure_irf,
    recovered_rcs_errors_db,
    relative_radiometric_accuracy,
)
from ..processing.rawsim import PointTarget, scene_reference
from ..utils import io
from ..utils.plotting import plot_irf_cuts
from ..utils.validators import validate_region
from .common import get_plan, get_slc, get_targets, output_dir, relative_entries, scenario_of


def locate_target(slc: Any, target: PointTarget, search_margin: float = 1.0) -> Optional[Tuple[int, int]]:
    """SLC pixel of a target's zero-Doppler position, or None when it falls outside the image"""
    plan = slc.plan
    solution = zero_doppler_solve(
        plan.geom.orbit, target.position, (plan.start - search_margin, plan.stop + search_margin)
    )
    row = int(round((solution.azimuth_time - slc.azimuth_time_axis[0]) / slc.metadata.azimuth_time_spacing))
    col = int(round((solution.slant_range - slc.slant_range_axis[0]) / slc.metadata.range_spacing))
    rows, cols = slc.pixels.shape
    if not (0 <= row < rows and 0 <= col < cols):
        return None
    return row, col


def noise_window(slc: Any, targets: List[PointTarget], region: Optional[Sequence[int]],
                 guard: int) -> Tuple[slice, slice]:
    """
    SLC window for the NESZ estimate

    Without a configured region the whole SLC is used, which is only
    target-free when no target falls inside the image.

    Raises:
        ValidationError: If the window holds a target, or no region is set
            and targets lie inside the SLC
    """
    pixels = [(t.name, p) for t, p in ((t, locate_target(slc, t)) for t in targets) if p is not None]
    if region is None:
        if pixels:
            names = ", ".join(name for name, _ in pixels)
            raise ValidationError(
                f"targets {names} lie inside the SLC; set calibration.noise_region to a target-free window",
                field="calibration.noise_region",
            )
        region = (0, slc.pixels.shape[0], 0, slc.pixels.shape[1])
    rows, cols = validate_region(region, slc.pixels.shape)
    for name, (row, col) in pixels:
        if rows.start - guard <= row < rows.stop + guard and cols.start - guard <= col < cols.stop + guard:
            raise ValidationError(
                f"noise region {tuple(region)} lies within {guard} pixels of target {name}",
                field="calibration.noise_region",
            )
    return rows, cols


class AnalyzeStage(BaseStage):
    """Stage responsible for IRF measurements on every simulated point target"""

    def __init__(self) -> None:
        super().__init__("analyze", "quality")

    def run(self, state: PipelineState) -> Dict[str, Any]:
        scenario = scenario_of(state)
        q = scenario.quality
        slc = get_slc(state)
        if slc.plan is None:
            raise ValidationError("SLC carries no collection plan", field="plan")
        root = output_dir(state)
        plots = get_config().plots and q.plots

        chips, reports, rcs, outputs = [], [], [], []
        for target in get_targets(state):
            pixel = locate_target(slc, target)
            if pixel is None:
                self.logger.warning(f"Target {target.name} lies outside the image; skipped")
                continue
            chip = extract_irf(slc, pixel, q.chip_size, q.oversample, target.name)
            report = measure_irf(chip, q.convention, q.mainlobe_policy)
            chips.append(chip)
            reports.append(report)
            rcs.append(target.rcs)
            if plots:
                path = plot_irf_cuts(chip, report, root / "plots" / f"irf_{target.name}.png")
                outputs += relative_entries([path], root, "plot")

        if not reports:
            raise ValidationError("no point target inside the SLC", field="targets")
        report_dicts = [r.model_dump(mode="json") for r in reports]
        outputs += relative_entries([io.write_json(report_dicts, root / "irf_reports.json")], root, "report")

        quality: Dict[str, Any] = {}
        if len(reports) >= 2:
            summary = aggregate_reports(reports)
            summary.relative_radiometric_accuracy_db = relative_radiometric_accuracy(chips, rcs)
            constant = slc.metadata.calibration_constant
            if constant is not None:
                summary.absolute_radiometric_error_db = float(
                    np.mean(recovered_rcs_errors_db(chips, rcs, constant))
                )
            quality = summary.model_dump(mode="json")
            table = format_table(summary)
            self.logger.info(f"IRF statistics over {len(reports)} targets\n{table}")
            table_path = root / "quality_table.txt"
            table_path.write_text(table + "\n")
            outputs += relative_entries([io.write_json(quality, root / "quality.json"), table_path], root, "report")

        return {
            "irf_reports": report_dicts,
            "quality": quality,
            "chips": chips,
            "outputs": outputs,
            "stage_results": {"analyze": {"targets": len(reports)}},
        }


class CalibrateStage(BaseStage):
    """Stage responsible for the absolute calibration constant"""

    def __init__(self) -> None:
        super().__init__("calibrate", "quality")

    def run(self, state: PipelineState) -> Dict[str, Any]:
        scenario = scenario_of(state)
        q = scenario.quality
        chips: List[Any] = list(state.get("chips") or [])
        rcs: List[float] = []
        if chips:
            by_name = {t.name: t.rcs for t in get_targets(state)}
            rcs = [by_name[c.name] for c in chips]
        else:
            slc = get_slc(state)
            for target in get_targets(state):
                pixel = locate_target(slc, target)
                if pixel is not None:
                    chips.append(extract_irf(slc, pixel, q.chip_size, q.oversample, target.name))
                    rcs.append(target.rcs)

        report = estimate_calibration_constant(chips, rcs)
        cfg = build_focus_config(scenario)
        if cfg.range_window.is_uniform and cfg.azimuth_window.is_uniform:
            chain = build_compensation_chain(scenario)
            reference = theoretical_calibration_constant(get_plan(state), cfg, chain)
            report = report.model_copy(update={"reference_constant": reference})
            self.logger.info(f"Radar-equation constant {10 * math.log10(reference):.2f} dB")
        root = output_dir(state)
        path = io.write_json(report, root / "calibration.json")
        return {
            "calibration": report.model_dump(mode="json"),
            "outputs": relative_entries([path], root, "report"),
            "stage_results": {"calibrate": {"constant_db": report.constant_db}},
        }


class NeszStage(BaseStage):
    """Stage responsible for the noise-equivalent sigma zero"""

    def __init__(self) -> None:
        super().__init__("nesz", "quality")

    def run(self, state: PipelineState) -> Dict[str, Any]:
        scenario = scenario_of(state)
        slc = get_slc(state)
        rows, cols = noise_window(slc, get_targets(state), scenario.calibration.noise_region,
                                  scenario.quality.chip_size // 2)
        meta = slc.metadata
        calibration = state.get("calibration") or {}
        if meta.calibration_constant is None and calibration.get("constant"):
            meta = meta.model_copy(update={"calibration_constant": calibration["constant"]})
        if meta.calibration_constant is None:
            raise MissingCalibrationError("NESZ needs a calibration constant")
        nesz = estimate_nesz(slc.pixels[rows, cols], meta, meta.center_incidence)

        plan = slc.plan if slc.plan is not None else get_plan(state)
        report = NoiseReport(
            nesz_db=nesz,
            theoretical_nesz_db=theoretical_nesz(plan, cfg=build_focus_config(scenario)),
            floor=nesz <= NESZ_FLOOR_DB,
            region_pixels=int(slc.pixels[rows, cols].size),
        )
        root = output_dir(state)
        path = io.write_json(report, root / "nesz.json")
        return {
            "noise": report.model_dump(mode="json"),
            "outputs": relative_entries([path], root, "report"),
            "stage_results": {"nesz": {"nesz_db": nesz}},
        }


class AmbiguityStage(BaseStage):
    """Stage responsible for azimuth and range ambiguity ratios"""

    def __init__(self) -> None:
        super().__init__("ambiguity", "quality")

    def run(self, state: PipelineState) -> Dict[str, Any]:
        scenario = scenario_of(state)
        plan = get_plan(state)
        ref = scene_reference(plan)
        bandwidth = build_focus_config(scenario).processed_doppler_bandwidth
        v_g = ref.ground_velocity

        aasr = estimate_aasr(plan.antenna, plan.prf, bandwidth, v_g)
        aasr_sim = simulate_aasr(plan.antenna, plan.prf, bandwidth, v_g, plan.wavelength, ref.slant_range)
        rasr = estimate_rasr(plan.antenna, plan.geom, plan.prf, wavelength=plan.wavelength)
        _, per_order = rasr_contributions(plan.antenna, plan.geom, plan.prf, wavelength=plan.wavelength)
        orders = {
            str(k): (10.0 * math.log10(float(v.max())) if float(v.max()) > 0 else RATIO_FLOOR_DB)
            for k, v in per_order.items()
        }
        report = AmbiguityReport(aasr_db=aasr, rasr_db=rasr, aasr_simulated_db=aasr_sim, rasr_orders_db=orders)
        self.logger.info(f"AASR {aasr:.1f} dB (simulated {aasr_sim:.1f} dB), RASR {rasr:.1f} dB")

        root = output_dir(state)
        path = io.write_json(report, root / "ambiguity.json")
        return {
            "ambiguity": report.model_dump(mode="json"),
            "outputs": relative_entries([path], root, "report"),
            "stage_results": {"ambiguity": {"aasr_db": aasr, "rasr_db": rasr}},
        }
