"""Workflow orchestration for the processing pipeline"""
from .orchestrator import WorkflowOrchestrator, create_workflow, exit_code_of, run_pipeline

__all__ = ["WorkflowOrchestrator", "create_workflow", "exit_code_of", "run_pipeline"]
