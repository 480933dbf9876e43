"""
Helpers shared by pipeline stages
Intermediates missing from the state are loaded from the run directory, so
every stage also runs standalone on persisted products.
"""
from pathlib import Path
from typing import Any, Dict, List

from ..config.scenario import ScenarioConfig, build_plan
from ..core.exceptions import ValidationError
from ..core.state import PipelineState
from ..processing.rawsim import CollectionPlan
from ..utils import io

RAW_NAME = "raw"
IMAGE_NAME = "image"
SLC_NAME = "slc"
GRD_NAME = "grd"


def output_dir(state: PipelineState) -> Path:
    return Path(state["output_dir"])


def scenario_of(state: PipelineState) -> ScenarioConfig:
    scenario = state.get("scenario")
    if not isinstance(scenario, ScenarioConfig):
        raise ValidationError("pipeline state has no scenario", field="scenario")
    return scenario


def _require(path: Path, what: str) -> None:
    if not path.with_suffix(".json").exists():
        raise ValidationError(f"no {what} in {path.parent}; run the producing stage first", field=what)


def get_raw(state: PipelineState) -> Any:
    if state.get("raw") is not None:
        return state["raw"]
    path = output_dir(state) / RAW_NAME
    _require(path, "raw data")
    return io.load_raw(path)


def get_image(state: PipelineState) -> Any:
    if state.get("image") is not None:
        return state["image"]
    path = output_dir(state) / IMAGE_NAME
    _require(path, "focused image")
    return io.load_image(path)


def get_slc(state: PipelineState) -> Any:
    if state.get("slc") is not None:
        return state["slc"]
    path = output_dir(state) / SLC_NAME
    _require(path, "SLC product")
    return io.load_slc(path)


def get_plan(state: PipelineState) -> CollectionPlan:
    """Plan of the current run: from the state, persisted raw data, or the scenario"""
    if state.get("plan") is not None:
        return state["plan"]
    raw_sidecar = output_dir(state) / f"{RAW_NAME}.json"
    if raw_sidecar.exists():
        return io.plan_from_dict(io.read_json(raw_sidecar)["plan"])
    return build_plan(scenario_of(state))


def get_targets(state: PipelineState) -> List[Any]:
    if state.get("targets"):
        return list(state["targets"])
    return list(get_raw(state).targets)


def relative_entries(paths: List[Path], root: Path, kind: str) -> List[Dict[str, Any]]:
    """Manifest entries with paths relative to the run directory"""
    entries = []
    for path in paths:
        entry = io.manifest_entry(path, kind)
        entry["path"] = str(Path(path).relative_to(root))
        entries.append(entry)
    return entries
