"""
Logging setup and raster summaries
"""
import logging
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from ..config import get_config

# Third-party loggers that are chatty at INFO
QUIET_LOGGERS = ("matplotlib", "PIL", "httpx", "langgraph")


def _handlers(console: bool, log_file: Optional[str]) -> List[logging.Handler]:
    handlers: List[logging.Handler] = []
    # stderr keeps stdout free for the quality table
    if console:
        handlers.append(logging.StreamHandler(sys.stderr))
    if log_file:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(log_file))
    return handlers


def setup_logging(
    level: Optional[str] = None,
    format_string: Optional[str] = None,
    log_file: Optional[str] = None,
    console: Optional[bool] = None,
) -> None:
    """
    Configure the root logger for a run

    Arguments left as None fall back to the runtime config. Calling it again
    replaces the previous handlers.

    Args:
        level: Logging level name (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        format_string: Record format
        log_file: Also write records to this file
        console: Write records to stderr
    """
    settings = get_config().logging
    numeric_level = getattr(logging, (level or settings.level).upper(), logging.INFO)
    formatter = logging.Formatter(format_string or settings.format)

    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
        handler.close()
    root.setLevel(numeric_level)

    for handler in _handlers(settings.console if console is None else console, log_file or settings.file):
        handler.setLevel(numeric_level)
        handler.setFormatter(formatter)
        root.addHandler(handler)

    for name in QUIET_LOGGERS:
        logging.getLogger(name).setLevel(max(logging.WARNING, numeric_level))


def log_raster(logger: logging.Logger, name: str, pixels: np.ndarray) -> None:
    """Log shape, dtype and peak magnitude of a raster at DEBUG"""
    if not logger.isEnabledFor(logging.DEBUG):
        return
    peak = float(np.max(np.abs(pixels))) if pixels.size else 0.0
    finite = bool(np.all(np.isfinite(pixels))) if pixels.size else True
    logger.debug(f"{name}: shape {pixels.shape}, dtype {pixels.dtype}, peak |x| {peak:.4g}, finite {finite}")
