"""Core modules for the processing pipeline"""
from .base_stage import EXIT_CODES, BaseStage
from .exceptions import SarError, StageError, ValidationError
from .state import PipelineState

__all__ = ["BaseStage", "EXIT_CODES", "PipelineState", "SarError", "StageError", "ValidationError"]
