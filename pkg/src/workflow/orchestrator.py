"""
Workflow Orchestrator
Manages the LangGraph pipeline over the selected processing stages
"""
import logging
from typing import Any, Dict, List, Optional, Tuple

from langgraph.graph import END, START, StateGraph

from ..config import get_config
from ..config.scenario import STAGE_ORDER, ScenarioConfig, build_focus_config
from ..core.state import PipelineState, create_initial_state, validate_pipeline_state
from ..processing.focus import FocusAlgorithm
from ..stages import get_stage_registry
from ..utils.validators import validate_output_dir

logger = logging.getLogger(__name__)


class WorkflowOrchestrator:
    """Orchestrates the processing stages using LangGraph"""

    def __init__(self, scenario: ScenarioConfig, stages: Optional[List[str]] = None):
        """
        Initialize workflow orchestrator

        Args:
            scenario: Validated scenario
            stages: Stage names to run (defaults to the scenario's list)
        """
        self.config = get_config()
        self.registry = get_stage_registry()
        self.scenario = scenario
        requested = list(stages) if stages is not None else list(scenario.stages)
        unknown = [s for s in requested if s not in STAGE_ORDER]
        if unknown:
            raise ValueError(f"Unknown stages: {unknown}")
        self.stages = [s for s in STAGE_ORDER if s in requested]
        self.app = None
        self._build_workflow()

    def _focus_node(self) -> str:
        """Spotlight and back-projection configurations use back-projection; Stripmap uses range-Doppler"""
        if build_focus_config(self.scenario).algorithm == FocusAlgorithm.BACKPROJECTION:
            return "focus_bp"
        return "focus_rda"

    def _node_name(self, stage: str) -> str:
        return self._focus_node() if stage == "focus" else stage

    def _build_workflow(self) -> None:
        """Build the LangGraph workflow"""
        logger.info(f"Building workflow: {' -> '.join(self.stages)}")
        workflow = StateGraph(PipelineState)

        names = [self._node_name(s) for s in self.stages]
        for name in names:
            workflow.add_node(name, self.registry.get_stage(name).process)
        if "focus" in self.stages:
            # Both focusing nodes exist so the mode router can pick either
            other = "focus_bp" if self._focus_node() == "focus_rda" else "focus_rda"
            workflow.add_node(other, self.registry.get_stage(other).process)

        workflow.add_conditional_edges(START, self._router(0), self._destinations())
        for i, stage in enumerate(self.stages):
            sources = ["focus_rda", "focus_bp"] if stage == "focus" else [stage]
            if stage == "report":
                workflow.add_edge("report", END)
                continue
            for source in sources:
                workflow.add_conditional_edges(source, self._router(i + 1), self._destinations())

        self.app = workflow.compile()
        logger.info("Workflow built successfully")

    def _destinations(self) -> Dict[str, str]:
        routes = {name: name for name in (self._node_name(s) for s in self.stages)}
        if "focus" in self.stages:
            routes.update({"focus_rda": "focus_rda", "focus_bp": "focus_bp"})
        routes["end"] = END
        return routes

    def _router(self, index: int):
        """Route to the next selected stage, or to the report after a failure"""
        def route(state: PipelineState) -> str:
            if state.get("error"):
                if "report" in self.stages:
                    logger.info("Stage failure recorded. Routing to report.")
                    return "report"
                return "end"
            if index >= len(self.stages):
                return "end"
            stage = self.stages[index]
            if stage == "focus":
                return self._mode_router(state)
            return stage
        return route

    def _mode_router(self, state: PipelineState) -> str:
        node = self._focus_node()
        logger.info(f"{self.scenario.geometry.mode.value} acquisition. Routing to {node}.")
        return node

    def run(
        self,
        output_dir: Optional[str] = None,
        seed: Optional[int] = None,
        threads: Optional[int] = None,
        command: str = "run",
    ) -> Dict[str, Any]:
        """
        Run the workflow on the scenario

        Args:
            output_dir: Run directory (defaults to the scenario's)
            seed: Seed override
            threads: Worker thread override
            command: Command name recorded in the manifest

        Returns:
            Final pipeline state
        """
        out = validate_output_dir(output_dir or self.scenario.output_dir)
        initial_state = create_initial_state(
            self.scenario,
            str(out),
            self.stages,
            command=command,
            seed=self.scenario.seed if seed is None else seed,
            threads=self.config.threads if threads is None else threads,
        )
        validate_pipeline_state(initial_state)

        logger.info(f"Starting workflow for scenario {self.scenario.name} in {out}")
        if self.app is None:
            raise RuntimeError("Workflow not initialized")

        try:
            final_state = self.app.invoke(initial_state)
        except Exception as e:
            logger.error(f"Workflow execution failed: {str(e)}", exc_info=True)
            raise

        if final_state.get("error"):
            logger.error(f"Workflow finished with failure in {final_state['error']['stage']}")
        else:
            logger.info("Workflow completed successfully")
        return final_state


def create_workflow(scenario: ScenarioConfig, stages: Optional[List[str]] = None) -> WorkflowOrchestrator:
    return WorkflowOrchestrator(scenario, stages)


def exit_code_of(state: Dict[str, Any]) -> int:
    error = state.get("error")
    return int(error.get("exit_code", 1)) if error else 0


def run_pipeline(
    config_path: str,
    output_dir: Optional[str] = None,
    seed: Optional[int] = None,
    threads: Optional[int] = None,
    stages: Optional[List[str]] = None,
    command: str = "run",
) -> Tuple[int, Dict[str, Any]]:
    """
    Load a scenario file and run the selected stages

    Returns:
        Tuple of (exit code, final state)

    Raises:
        ValidationError: If the scenario file is missing or invalid
    """
    scenario = ScenarioConfig.from_file(config_path)
    if seed is not None:
        scenario = scenario.model_copy(update={"seed": seed})
    state = create_workflow(scenario, stages).run(output_dir, seed, threads, command)
    return exit_code_of(state), state
