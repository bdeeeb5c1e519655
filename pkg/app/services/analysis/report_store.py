"""Local persistence for experiment tables and the global run history."""

from __future__ import annotations

import csv
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

from app.core.config import Settings, get_settings
from app.core.logging import get_logger

from .experiments import HISTORY_COLUMNS, TABLE_COLUMNS, ErrorRow

logger = get_logger(__name__)

HISTORY_FILE = "run_history.csv"


class ReportStore:
    """Write table CSVs and append every run to ``reports_folder/run_history.csv``."""

    def __init__(self, settings: Optional[Settings] = None):
        self.settings = settings or get_settings()

    def write_table(
        self,
        rows: Sequence[ErrorRow],
        out_path: Optional[Union[str, Path]] = None,
        name: str = "table",
    ) -> Path:
        timestamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%SZ")
        if out_path is None:
            out_path = Path(self.settings.output_folder) / f"{name}_{timestamp}.csv"
        path = Path(out_path)
        path.parent.mkdir(parents=True, exist_ok=True)

        records = [row.csv_row() for row in rows]
        with path.open("w", newline="", encoding="utf-8") as f:
            writer = csv.DictWriter(f, fieldnames=TABLE_COLUMNS)
            writer.writeheader()
            writer.writerows(records)

        self._append_history([row.history_row() for row in rows], name, path, timestamp)
        logger.info("Saved table CSV | path=%s | rows=%s", path, len(records))
        return path

    def _append_history(
        self, records: List[Dict[str, Any]], name: str, path: Path, timestamp: str
    ) -> None:
        if not records:
            return
        history_dir = Path(self.settings.reports_folder)
        history_dir.mkdir(parents=True, exist_ok=True)
        history_path = history_dir / HISTORY_FILE
        file_exists = history_path.exists()
        fieldnames = ["timestamp_utc", "run", "output_path"] + TABLE_COLUMNS + HISTORY_COLUMNS

        with history_path.open("a", newline="", encoding="utf-8") as f:
            writer = csv.DictWriter(f, fieldnames=fieldnames)
            if not file_exists:
                writer.writeheader()
            for record in records:
                writer.writerow({"timestamp_utc": timestamp, "run": name, "output_path": str(path), **record})
