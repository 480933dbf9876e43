"""
Runtime configuration for the SAR product toolkit

Settings that change how a run executes but never what it computes: logging,
worker threads, output root and plotting. Scenario files hold everything that
affects the products.
"""
import json
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, Optional

from dotenv import load_dotenv

from ..core.exceptions import ValidationError

load_dotenv()

ENV_THREADS = "SARKIT_THREADS"
ENV_LOG_LEVEL = "SARKIT_LOG_LEVEL"
ENV_CONFIG_PATH = "SARKIT_CONFIG_PATH"

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def _threads_from_env() -> Optional[int]:
    """Thread count from SARKIT_THREADS, None when unset or unparsable"""
    raw = os.getenv(ENV_THREADS, "").strip()
    if not raw:
        return None
    try:
        return max(1, int(raw))
    except ValueError:
        return None


@dataclass
class LoggingConfig:
    level: str = field(default_factory=lambda: os.getenv(ENV_LOG_LEVEL, "INFO").upper())
    format: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    file: Optional[str] = None
    console: bool = True

    def __post_init__(self) -> None:
        self.level = self.level.upper()
        if self.level not in LOG_LEVELS:
            raise ValidationError(f"unknown log level {self.level!r}", field="logging.level")


@dataclass
class Config:
    """Execution settings shared by every stage of a run"""
    logging: LoggingConfig = field(default_factory=LoggingConfig)
    # Workers for echo synthesis and back-projection; results do not depend on it
    threads: int = field(default_factory=lambda: _threads_from_env() or 1)
    output_root: str = "runs"
    plots: bool = True
    plot_dpi: int = 100

    def __post_init__(self) -> None:
        if self.threads < 1:
            raise ValidationError("threads must be at least 1", field="threads")
        if self.plot_dpi < 10:
            raise ValidationError("plot_dpi must be at least 10", field="plot_dpi")

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Config":
        """
        Build a config from a mapping; SARKIT_THREADS wins over a file value

        Raises:
            ValidationError: On unknown keys or out-of-range values
        """
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValidationError(f"unknown runtime config keys: {', '.join(unknown)}")

        values = dict(data)
        try:
            values["logging"] = LoggingConfig(**data.get("logging", {}))
        except TypeError as e:
            raise ValidationError(f"bad logging section: {e}", field="logging") from e
        env_threads = _threads_from_env()
        if env_threads is not None:
            values["threads"] = env_threads
        return cls(**values)

    @classmethod
    def from_file(cls, file_path: str) -> "Config":
        path = Path(file_path)
        if not path.is_file():
            raise ValidationError(f"runtime config not found: {file_path}", field="runtime_config")
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as e:
            raise ValidationError(f"runtime config is not valid JSON: {e}", field="runtime_config") from e
        return cls.from_dict(data)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


_config: Optional[Config] = None


def get_config() -> Config:
    """Process-wide config, built from the environment on first use"""
    global _config
    if _config is None:
        _config = Config()
    return _config


def load_config(file_path: Optional[str] = None) -> Config:
    """Load the process-wide config from a file, SARKIT_CONFIG_PATH, or defaults"""
    global _config
    path = file_path or os.getenv(ENV_CONFIG_PATH)
    if file_path or (path and Path(path).exists()):
        _config = Config.from_file(path)
    else:
        _config = Config()
    return _config


def reset_config() -> None:
    global _config
    _config = None
