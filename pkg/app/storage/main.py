import json
import logging
from pathlib import Path
from typing import Any, Iterable, Mapping, Optional, Sequence, Union

import numpy as np
import yaml
from pydantic import BaseModel

from app.errors import ConfigError
from app.fields.grid import Grid2D
from app.utils.template_utils import render_template
from .chbf import series_path, write_series, write_snapshot
from .csv_log import CsvLog

logger = logging.getLogger(__name__)


class RunStorage:
    """Run directory; every artifact of a command is written through here."""

    def __init__(self, out_dir: Union[str, Path]):
        self.root = Path(out_dir)
        try:
            self.root.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise ConfigError(f"Cannot create output directory {self.root}: {e}")
        logger.info("Writing run outputs to %s", self.root)

    def path(self, name: str) -> Path:
        return self.root / name

    def save_field(self, name: str, grid: Grid2D, field: np.ndarray) -> Path:
        path = write_snapshot(self.path(f"{name}.chbf"), grid, field)
        logger.info("Saved field %s", path)
        return path

    def save_series(self, name: str, grid: Grid2D, fields: Iterable[np.ndarray],
                    subdir: Optional[str] = None) -> Path:
        directory = self.path(subdir or name)
        write_series(directory, name, grid, fields)
        return directory

    def save_series_entry(self, name: str, index: int, grid: Grid2D, field: np.ndarray,
                          subdir: Optional[str] = None) -> Path:
        """One entry of a series written while a run progresses."""
        return write_snapshot(series_path(self.path(subdir or name), name, index), grid, field)

    def open_csv(self, name: str, columns: Sequence[str]) -> CsvLog:
        log = CsvLog(self.path(f"{name}.csv"), columns)
        logger.info("Logging %s", log.path)
        return log

    def save_csv(self, name: str, columns: Sequence[str], rows: Iterable[Mapping[str, Any]]) -> Path:
        with self.open_csv(name, columns) as log:
            log.write_many(rows)
        return log.path

    def save_json(self, name: str, report: Union[BaseModel, Mapping[str, Any]]) -> Path:
        path = self.path(f"{name}.json")
        if isinstance(report, BaseModel):
            text = report.model_dump_json(indent=2)
        else:
            text = json.dumps(report, indent=2, sort_keys=True)
        path.write_text(text + "\n", encoding="utf-8")
        logger.info("Saved report %s", path)
        return path

    def save_config(self, config: BaseModel, name: str = "run_config") -> Path:
        """Resolved run configuration, so a run directory is self-describing."""
        path = self.path(f"{name}.yaml")
        data = config.model_dump(mode="json")
        path.write_text(yaml.safe_dump(data, sort_keys=False), encoding="utf-8")
        logger.info("Saved configuration %s", path)
        return path

    def render_script(self, template: str, context: Mapping[str, Any]) -> Path:
        """Render a plot-script template next to the CSVs it reads."""
        path = self.path(f"{template}.py")
        path.write_text(render_template(template, context), encoding="utf-8")
        logger.info("Rendered %s", path)
        return path
