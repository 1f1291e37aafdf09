"""Process settings of the CHB solver and the one-time logging setup.

Only this module reads os.environ. A `.env` file in the working directory is
loaded first (python-dotenv); values already set in the environment win.

Variables (see .env.example):
- DEBUG: truthy (1/true/yes/on) switches logging to DEBUG with file:line
- CHB_THREADS: worker threads for the FFT convolution, positive integer
- CHB_TEMPLATE_DIR: directory searched first for plot-script templates

Run parameters do not live here; they come from the YAML run configuration
(app/run_config.py).
"""

from __future__ import annotations

import logging
import os
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError

_TRUTHY = {"1", "true", "yes", "y", "on"}

_BASE_FORMAT = "%(asctime)s | %(levelname)s | %(name)s | %(message)s"
_DEBUG_FORMAT = "%(asctime)s | %(levelname)s | %(name)s:%(lineno)d | %(message)s"


def _env_flag(name: str) -> bool:
    raw = os.environ.get(name)
    return raw is not None and raw.strip().lower() in _TRUTHY


def _env_threads(name: str) -> int:
    """Positive integer, or 1 for anything unparsable."""
    try:
        value = int(os.environ.get(name, "1"))
    except ValueError:
        return 1
    return value if value > 0 else 1


class LoggingSettings(BaseModel):
    debug: bool = Field(default=False, description="DEBUG level and file:line records when set")

    @property
    def level(self) -> int:
        return logging.DEBUG if self.debug else logging.INFO

    @property
    def format(self) -> str:
        return _DEBUG_FORMAT if self.debug else _BASE_FORMAT


class RuntimeSettings(BaseModel):
    """Process-level knobs that do not belong to a run configuration."""
    threads: int = Field(default=1, ge=1, description="Worker threads for scipy.fft")
    template_dir: Optional[Path] = Field(default=None, description="Custom plot-script template directory")


class Config(BaseModel):
    logging: LoggingSettings
    runtime: RuntimeSettings

    @classmethod
    def from_env(cls) -> "Config":
        """Build settings from the environment; logging is left to configure_logging()."""
        load_dotenv()
        try:
            return cls(
                logging=LoggingSettings(debug=_env_flag("DEBUG")),
                runtime=RuntimeSettings(
                    threads=_env_threads("CHB_THREADS"),
                    template_dir=os.environ.get("CHB_TEMPLATE_DIR") or None,
                ),
            )
        except ValidationError as e:
            raise ValueError(f"Invalid process settings: {e}")


_CONFIG: Optional[Config] = None
_LOGGING_READY: bool = False


def configure_logging(config: Config) -> None:
    """Attach one stream handler to the root logger; later calls are no-ops."""
    global _LOGGING_READY
    if _LOGGING_READY:
        return
    root = logging.getLogger()
    # an embedding application may have installed its own handlers
    if not root.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(config.logging.format))
        root.addHandler(handler)
    root.setLevel(config.logging.level)
    _LOGGING_READY = True


def set_quiet() -> None:
    """Raise the root level to WARNING (the --quiet flag)."""
    logging.getLogger().setLevel(logging.WARNING)


def get_config() -> Config:
    """Process-wide settings, read on first use; logging is configured at the same time."""
    global _CONFIG
    if _CONFIG is None:
        _CONFIG = Config.from_env()
        configure_logging(_CONFIG)
        logging.getLogger(__name__).debug("Process settings: %s", _CONFIG.model_dump())
    return _CONFIG


def reset_config() -> None:
    """Forget the cached settings so the next get_config() rereads the environment."""
    global _CONFIG
    _CONFIG = None
