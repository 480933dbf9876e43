"""Utility modules for the SAR product toolkit"""
from .logger import log_raster, setup_logging
from .validators import validate_output_dir, validate_raster, validate_region, validate_seed

__all__ = [
    "setup_logging",
    "log_raster",
    "validate_output_dir",
    "validate_raster",
    "validate_region",
    "validate_seed",
]
