"""
State management for the processing pipeline
"""
from typing import Annotated, Any, Dict, List, Optional, TypedDict

from .exceptions import ValidationError


# Reducer functions for stage updates
def add_records(left: List[Dict[str, Any]], right: List[Dict[str, Any]]) -> List[Dict[str, Any]]:
    """Append records (stage log, manifest entries) from a stage"""
    if not isinstance(left, list):
        left = []
    if not isinstance(right, list):
        right = [right] if right else []
    return left + right


def merge_results(left: Dict[str, Any], right: Dict[str, Any]) -> Dict[str, Any]:
    """Merge per-stage result summaries"""
    if not isinstance(left, dict):
        left = {}
    if not isinstance(right, dict):
        right = {right.get("stage", "unknown"): right} if right else {}
    return {**left, **right}


def last_value(left: Any, right: Any) -> Any:
    """Take the rightmost value (latest stage)"""
    return right if right is not None else left


class PipelineState(TypedDict, total=False):
    """State carried between pipeline stages"""
    # Run inputs
    scenario: Any
    command: str
    output_dir: str
    seed: int
    threads: int
    selected_stages: List[str]

    # Intermediates
    plan: Any
    targets: List[Any]
    raw: Any
    image: Any
    slc: Any
    grd: Any

    # Analysis outputs
    irf_reports: List[Dict[str, Any]]
    chips: List[Any]
    quality: Dict[str, Any]
    calibration: Dict[str, Any]
    noise: Dict[str, Any]
    ambiguity: Dict[str, Any]

    # Bookkeeping
    stage_log: Annotated[List[Dict[str, Any]], add_records]
    outputs: Annotated[List[Dict[str, Any]], add_records]
    stage_results: Annotated[Dict[str, Any], merge_results]
    workflow_stage: Annotated[str, last_value]
    error: Optional[Dict[str, Any]]


def validate_pipeline_state(state: PipelineState) -> bool:
    """Validate pipeline state structure"""
    required_fields = ["scenario", "output_dir"]
    for name in required_fields:
        if name not in state:
            raise ValidationError(f"Missing required field: {name}", field=name)
    return True


def create_initial_state(
    scenario: Any,
    output_dir: str,
    selected_stages: List[str],
    **kwargs: Any,
) -> PipelineState:
    """Create initial pipeline state with default values"""
    state: PipelineState = {
        "scenario": scenario,
        "command": kwargs.get("command", "run"),
        "output_dir": output_dir,
        "seed": kwargs.get("seed", getattr(scenario, "seed", 0)),
        "threads": kwargs.get("threads", 1),
        "selected_stages": list(selected_stages),
        "irf_reports": [],
        "stage_log": [],
        "outputs": [],
        "stage_results": {},
        "workflow_stage": "initialized",
        "error": None,
    }
    for key in ("plan", "targets", "raw", "image", "slc", "grd"):
        if kwargs.get(key) is not None:
            state[key] = kwargs[key]
    return state
