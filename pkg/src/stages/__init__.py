"""
Pipeline stages
"""
from .analysis import AmbiguityStage, AnalyzeStage, CalibrateStage, NeszStage
from .focusing import FocusStage
from .products import GRDStage, SLCStage
from .registry import StageRegistry, get_stage_registry
from .report import ReportStage
from .simulate import SimulateStage

__all__ = [
    "SimulateStage",
    "FocusStage",
    "SLCStage",
    "GRDStage",
    "AnalyzeStage",
    "CalibrateStage",
    "NeszStage",
    "AmbiguityStage",
    "ReportStage",
    "StageRegistry",
    "get_stage_registry",
]
