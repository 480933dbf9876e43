"""
Product Stages
SLC formation (with the configured gain compensations) and GRD formation
"""
from typing import Any, Dict

from ..config import get_config
from ..config.scenario import build_compensation_chain, grd_spacing
from ..core.base_stage import BaseStage
from ..core.exceptions import ValidationError
from ..core.state import PipelineState
from ..processing.calibration import apply_compensations, gain_surface
from ..processing.products import form_grd, form_slc
from ..utils import io
from ..utils.plotting import plot_gain_surface, plot_quicklook
from .common import GRD_NAME, SLC_NAME, get_image, get_slc, output_dir, relative_entries, scenario_of


class SLCStage(BaseStage):
    """Stage responsible for single-look complex products"""

    def __init__(self) -> None:
        super().__init__("slc", "product")

    def run(self, state: PipelineState) -> Dict[str, Any]:
        scenario = scenario_of(state)
        img = get_image(state)
        root = output_dir(state)
        outputs = []

        chain = build_compensation_chain(scenario)
        if chain.corrections:
            if get_config().plots and scenario.quality.plots:
                path = plot_gain_surface(gain_surface(img, chain, img.plan), root / "plots" / "compensation_gain.png")
                outputs += relative_entries([path], root, "plot")
            img = apply_compensations(img, chain, img.plan)

        constant = scenario.product.calibration_constant
        calibration = state.get("calibration") or {}
        if constant is None and calibration.get("constant"):
            constant = calibration["constant"]
        slc = form_slc(img, calibration_constant=constant)

        outputs += relative_entries(io.save_slc(slc, root / SLC_NAME), root, "product")
        if get_config().plots and scenario.quality.plots:
            path = plot_quicklook(slc.pixels, root / "plots" / "slc_quicklook.png", title="SLC")
            outputs += relative_entries([path], root, "plot")
        return {
            "slc": slc,
            "outputs": outputs,
            "stage_results": {
                "slc": {
                    "shape": list(slc.pixels.shape),
                    "range_spacing": slc.range_spacing,
                    "azimuth_spacing": slc.azimuth_spacing,
                    "compensations": slc.metadata.compensations,
                }
            },
        }


class GRDStage(BaseStage):
    """Stage responsible for ground-range detected products"""

    def __init__(self) -> None:
        super().__init__("grd", "product")

    def run(self, state: PipelineState) -> Dict[str, Any]:
        scenario = scenario_of(state)
        slc = get_slc(state)
        if slc.plan is None:
            raise ValidationError("SLC carries no collection plan", field="plan")
        product = scenario.product
        grd = form_grd(
            slc,
            target_spacing=grd_spacing(scenario),
            window=product.grd_window.build(),
            geom=slc.plan.geom,
            resolution=product.grd_resolution,
            scale_policy=product.scale_policy,
            fixed_scale=product.fixed_scale,
            resampler=product.resampler,
        )

        root = output_dir(state)
        outputs = relative_entries(io.save_grd(grd, root / GRD_NAME), root, "product")
        if get_config().plots and scenario.quality.plots:
            path = plot_quicklook(grd.pixels, root / "plots" / "grd_quicklook.png", title="GRD")
            outputs += relative_entries([path], root, "plot")
        return {
            "grd": grd,
            "outputs": outputs,
            "stage_results": {
                "grd": {
                    "shape": list(grd.pixels.shape),
                    "ground_spacing": grd.ground_spacing,
                    "looks": list(grd.looks),
                    "quantization_scale": grd.metadata.quantization_scale,
                }
            },
        }
