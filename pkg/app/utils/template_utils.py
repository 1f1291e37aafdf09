"""Plot-script templates: lookup across override directories and pystache rendering."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any, List, Mapping, Optional

import pystache

from app.config import get_config
from app.errors import ConfigError

logger = logging.getLogger(__name__)

TEMPLATE_SUFFIX = ".py.mustache"

# Shipped with the package
DEFAULT_TEMPLATE_DIR = Path(__file__).resolve().parent.parent / "templates" / "default"

# Mount point of ./custom_templates in the container
APP_CUSTOM_DIR = Path("/app/custom_templates")


def template_search_path() -> List[Path]:
    """CHB_TEMPLATE_DIR (when set), then the container mount, then the packaged defaults."""
    override = get_config().runtime.template_dir
    head = [Path(override)] if override is not None else []
    return head + [APP_CUSTOM_DIR, DEFAULT_TEMPLATE_DIR]


def find_file_in_template_dirs(filename: str) -> Optional[Path]:
    """First existing `filename` along the search path, or None."""
    for directory in template_search_path():
        candidate = directory / filename
        if not candidate.is_file():
            continue
        origin = "default" if directory == DEFAULT_TEMPLATE_DIR else "custom"
        logger.info("Using %s plot template %s from %s", origin, filename, directory)
        return candidate
    logger.debug("No %s in %s", filename, ", ".join(str(d) for d in template_search_path()))
    return None


def find_plot_template(name: str) -> Path:
    """Resolve `<name>.py.mustache`; names are bare identifiers, not paths."""
    if Path(name).name != name:
        raise ConfigError(f"Template name must not contain path separators: {name!r}")
    path = find_file_in_template_dirs(name + TEMPLATE_SUFFIX)
    if path is None:
        raise ConfigError(f"Plot template '{name}' not found")
    return path


def render_template(name: str, context: Mapping[str, Any]) -> str:
    """Render a plot-script template; values are inserted verbatim (no HTML escaping)."""
    source = find_plot_template(name).read_text(encoding="utf-8")
    renderer = pystache.Renderer(escape=lambda u: u)
    return renderer.render(source, dict(context))
