"""
Base Stage Class for the processing pipeline
Provides common functionality for all pipeline stages
"""
import logging
import time
from abc import ABC, abstractmethod
from typing import Any, Dict

from .exceptions import SarError, StageError, ValidationError
from .state import PipelineState

logger = logging.getLogger(__name__)

EXIT_CODES: Dict[str, int] = {
    "config": 2,
    "simulation": 3,
    "focusing": 4,
    "product": 5,
    "quality": 6,
}


class BaseStage(ABC):
    """Base class for all stages of the processing pipeline"""

    def __init__(self, stage_name: str, stage_type: str):
        """
        Initialize base stage

        Args:
            stage_name: Unique name for the stage
            stage_type: Failure category of the stage (a key of EXIT_CODES or "report")
        """
        if not stage_name or not stage_name.strip():
            raise ValidationError("Stage name cannot be empty", field="stage_name")
        if not stage_type or not stage_type.strip():
            raise ValidationError("Stage type cannot be empty", field="stage_type")

        self.stage_name = stage_name.strip()
        self.stage_type = stage_type.strip()
        self.logger = logging.getLogger(f"{__name__}.{self.stage_name}")

    @property
    def exit_code(self) -> int:
        return EXIT_CODES.get(self.stage_type, 1)

    @abstractmethod
    def run(self, state: PipelineState) -> Dict[str, Any]:
        """
        Do the stage's work and return state updates

        Args:
            state: Current pipeline state

        Returns:
            Dictionary with state updates
        """

    def execute(self, state: PipelineState) -> Dict[str, Any]:
        """
        Run the stage, wrapping any failure in StageError

        Raises:
            StageError: Carrying the stage name and the underlying error code
        """
        try:
            return self.run(state)
        except StageError:
            raise
        except SarError as e:
            self.logger.error(f"{self.stage_name} failed: {e}", exc_info=True)
            raise StageError(str(e), stage=self.stage_name, code=e.code) from e
        except Exception as e:
            self.logger.error(f"{self.stage_name} failed unexpectedly: {e}", exc_info=True)
            raise StageError(str(e), stage=self.stage_name, code="internal") from e

    def process(self, state: PipelineState) -> Dict[str, Any]:
        """
        Graph node entry point

        Failures are recorded in the state instead of raised so the workflow
        can route to the report stage. Stages are skipped once an error is set.
        """
        if state.get("error"):
            self.logger.info(f"Skipping {self.stage_name} after earlier failure")
            return {}
        self.logger.info(f"Starting {self.stage_name}")
        started = time.perf_counter()
        try:
            updates = self.execute(state)
        except StageError as e:
            return {
                "error": {
                    "stage": self.stage_name,
                    "code": e.code,
                    "message": str(e),
                    "exit_code": self.exit_code,
                },
                "stage_log": [self._record("failed", started)],
                "workflow_stage": f"{self.stage_name}_failed",
            }
        updates = dict(updates)
        updates["stage_log"] = [self._record("ok", started)]
        updates["workflow_stage"] = self.stage_name
        self.logger.info(f"Finished {self.stage_name} in {time.perf_counter() - started:.2f} s")
        return updates

    def _record(self, status: str, started: float) -> Dict[str, Any]:
        return {
            "stage": self.stage_name,
            "status": status,
            "seconds": round(time.perf_counter() - started, 3),
        }

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(name={self.stage_name}, type={self.stage_type})"
