"""
Simulation Stage
Builds the collection plan and point targets of a scenario and synthesizes raw echoes
"""
from typing import Any, Dict

from ..config.scenario import build_plan, build_targets
from ..core.base_stage import BaseStage
from ..core.state import PipelineState
from ..processing.rawsim import simulate_raw
from ..utils import io
from ..utils.logger import log_raster
from .common import RAW_NAME, output_dir, relative_entries, scenario_of


class SimulateStage(BaseStage):
    """Stage responsible for raw data synthesis"""

    def __init__(self) -> None:
        super().__init__("simulate", "simulation")

    def run(self, state: PipelineState) -> Dict[str, Any]:
        scenario = scenario_of(state)
        plan = build_plan(scenario).with_updates(seed=state.get("seed", scenario.seed))
        targets = build_targets(scenario, plan)
        self.logger.info(f"Simulating {len(targets)} target(s), mode {plan.geom.mode.value}")

        raw = simulate_raw(targets, plan, threads=state.get("threads"))
        log_raster(self.logger, "raw", raw.samples)

        root = output_dir(state)
        paths = io.save_raw(raw, root / RAW_NAME)
        return {
            "plan": plan,
            "targets": targets,
            "raw": raw,
            "outputs": relative_entries(paths, root, "raw"),
            "stage_results": {
                "simulate": {
                    "pulses": raw.num_pulses,
                    "samples": raw.num_samples,
                    "targets": [t.name for t in targets],
                    "noise_power": raw.noise_power,
                }
            },
        }
