"""Append-only CSV logs with a fixed column order."""

from __future__ import annotations

import csv
import logging
from pathlib import Path
from typing import Iterable, List, Mapping, Sequence

from app.errors import ConfigError
from .utils import format_value

logger = logging.getLogger(__name__)


class CsvLog:
    """Writes the header once, then one flushed row per `write`."""

    def __init__(self, path: Path, columns: Sequence[str]):
        self.path = Path(path)
        self.columns: List[str] = list(columns)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = self.path.open("w", newline="", encoding="utf-8")
        self._writer = csv.writer(self._fh)
        self._writer.writerow(self.columns)
        self._fh.flush()
        self.rows = 0

    def write(self, row: Mapping[str, object]) -> None:
        missing = [c for c in self.columns if c not in row]
        if missing:
            raise ConfigError(f"CSV row for {self.path.name} lacks columns {missing}")
        self._writer.writerow([format_value(row[c]) for c in self.columns])
        self._fh.flush()
        self.rows += 1

    def write_many(self, rows: Iterable[Mapping[str, object]]) -> None:
        for row in rows:
            self.write(row)

    def close(self) -> None:
        if not self._fh.closed:
            self._fh.close()
            logger.debug("Closed %s after %d rows", self.path, self.rows)

    def __enter__(self) -> "CsvLog":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def read_csv(path: Path) -> List[dict]:
    """Rows as dicts of strings."""
    with Path(path).open(newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))
