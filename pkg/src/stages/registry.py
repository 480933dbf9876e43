"""
Stage Registry
Manages stage instances and provides factory methods
"""
from typing import Callable, Dict, Optional

from ..core.base_stage import BaseStage
from ..core.exceptions import ValidationError
from ..processing.focus import FocusAlgorithm
from .analysis import AmbiguityStage, AnalyzeStage, CalibrateStage, NeszStage
from .focusing import FocusStage
from .products import GRDStage, SLCStage
from .report import ReportStage
from .simulate import SimulateStage


class StageRegistry:
    """Registry for managing stage instances"""

    def __init__(self) -> None:
        self._stages: Dict[str, BaseStage] = {}
        self._factories: Dict[str, Callable[[], BaseStage]] = {
            "simulate": SimulateStage,
            "focus_rda": lambda: FocusStage(FocusAlgorithm.RANGE_DOPPLER),
            "focus_bp": lambda: FocusStage(FocusAlgorithm.BACKPROJECTION),
            "slc": SLCStage,
            "grd": GRDStage,
            "analyze": AnalyzeStage,
            "calibrate": CalibrateStage,
            "nesz": NeszStage,
            "ambiguity": AmbiguityStage,
            "report": ReportStage,
        }

    def register_stage(self, name: str, stage: BaseStage) -> None:
        """
        Register a stage instance

        Raises:
            ValidationError: If the name is empty or the object is not a stage
        """
        if not name or not name.strip():
            raise ValidationError("Stage name cannot be empty", field="name")

        if not isinstance(stage, BaseStage):
            raise ValidationError("Stage must be an instance of BaseStage", field="stage")

        self._stages[name.strip()] = stage

    def get_stage(self, name: str) -> BaseStage:
        """Registered instance for a name, created on first use"""
        name = name.strip()
        if name not in self._stages:
            if name not in self._factories:
                raise ValidationError(f"Unknown stage: {name}", field="stage")
            self.register_stage(name, self._factories[name]())
        return self._stages[name]

    def names(self) -> list:
        return list(self._factories)

    def clear(self) -> None:
        self._stages.clear()


# Global registry instance
_registry: Optional[StageRegistry] = None


def get_stage_registry() -> StageRegistry:
    """Get global stage registry instance"""
    global _registry
    if _registry is None:
        _registry = StageRegistry()
    return _registry
