"""Runtime configuration for the SAR product toolkit

Scenario files are handled by src.config.scenario, imported explicitly since
it depends on the processing modules.
"""
from .config import Config, LoggingConfig, get_config, load_config, reset_config

__all__ = ["Config", "LoggingConfig", "get_config", "load_config", "reset_config"]
