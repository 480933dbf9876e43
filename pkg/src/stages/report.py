"""
Report Stage
Writes the run manifest; reached on success and after any stage failure
"""
from typing import Any, Dict

from .. import __version__
from ..core.base_stage import BaseStage
from ..core.exceptions import StageError
from ..core.models import ManifestEntry, RunManifest
from ..core.state import PipelineState
from ..utils import io
from .common import output_dir, scenario_of

MANIFEST_NAME = "manifest.json"


def build_manifest(state: PipelineState) -> RunManifest:
    scenario = scenario_of(state)
    error = state.get("error") or {}
    stages = [r["stage"] for r in state.get("stage_log", []) if r.get("status") == "ok"]
    return RunManifest(
        command=state.get("command", "run"),
        scenario=scenario.name,
        seed=state.get("seed", scenario.seed),
        status="failed" if error else "ok",
        exit_code=int(error.get("exit_code", 0)),
        error_code=error.get("code"),
        error_message=error.get("message"),
        stages=stages,
        outputs=[ManifestEntry(**entry) for entry in state.get("outputs", [])],
        processor_version=__version__,
    )


class ReportStage(BaseStage):
    """Stage responsible for the run manifest"""

    def __init__(self) -> None:
        super().__init__("report", "report")

    def process(self, state: PipelineState) -> Dict[str, Any]:
        # Runs even when an earlier stage recorded an error
        try:
            updates = self.execute(state)
        except StageError:
            return {"workflow_stage": f"{self.stage_name}_failed"}
        updates["workflow_stage"] = self.stage_name
        return updates

    def run(self, state: PipelineState) -> Dict[str, Any]:
        manifest = build_manifest(state)
        path = io.write_json(manifest, output_dir(state) / MANIFEST_NAME)
        if manifest.status == "ok":
            self.logger.info(f"Run manifest with {len(manifest.outputs)} outputs written to {path}")
        else:
            self.logger.error(
                f"Run failed in {state['error']['stage']} ({manifest.error_code}); manifest at {path}"
            )
        return {"stage_results": {"report": {"manifest": str(path), "status": manifest.status}}}
