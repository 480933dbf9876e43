"""
Focusing Stages
Range-Doppler processing for Stripmap and time-domain back-projection for Spotlight
"""
from dataclasses import replace
from typing import Any, Dict

from ..config.scenario import build_focus_config, build_grid
from ..core.base_stage import BaseStage
from ..core.state import PipelineState
from ..processing.focus import FocusAlgorithm, focus_backprojection, focus_range_doppler
from ..utils import io
from ..utils.logger import log_raster
from .common import IMAGE_NAME, get_raw, output_dir, relative_entries, scenario_of


class FocusStage(BaseStage):
    """Stage responsible for image formation with one algorithm"""

    def __init__(self, algorithm: FocusAlgorithm):
        name = "focus_rda" if algorithm == FocusAlgorithm.RANGE_DOPPLER else "focus_bp"
        super().__init__(name, "focusing")
        self.algorithm = FocusAlgorithm(algorithm)

    def run(self, state: PipelineState) -> Dict[str, Any]:
        scenario = scenario_of(state)
        raw = get_raw(state)
        cfg = replace(build_focus_config(scenario), algorithm=self.algorithm)
        threads = state.get("threads")

        if self.algorithm == FocusAlgorithm.RANGE_DOPPLER:
            img = focus_range_doppler(raw, cfg, threads=threads)
        else:
            grid = build_grid(scenario, raw.plan)
            img = focus_backprojection(raw, grid, cfg, threads=threads)
        log_raster(self.logger, "image", img.pixels)

        root = output_dir(state)
        paths = io.save_image(img, root / IMAGE_NAME)
        return {
            "plan": raw.plan,
            "image": img,
            "outputs": relative_entries(paths, root, "image"),
            "stage_results": {
                "focus": {
                    "algorithm": self.algorithm.value,
                    "shape": list(img.pixels.shape),
                    "azimuth_bandwidth": img.metadata.get("azimuth_bandwidth"),
                }
            },
        }
