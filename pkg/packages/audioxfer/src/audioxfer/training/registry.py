"""On-disk run registry.

Layout::

    <root>/runs/<run_id>/config.toml
    <root>/runs/<run_id>/record.json
    <root>/runs/<run_id>/metrics.csv
    <root>/runs/<run_id>/checkpoint/      WeightArchive of the final weights
"""

import json
import logging
import os
import re
import uuid
from collections.abc import Callable
from pathlib import Path
from typing import Any

from audioxfer.errors import MissingArtifactError
from audioxfer.models.archive import WeightArchive
from audioxfer.tomlio import write_toml
from audioxfer.training.types import RunRecord

logger = logging.getLogger(__name__)

RUNS_DIR = "runs"
RECORD_FILE = "record.json"
METRICS_FILE = "metrics.csv"
CONFIG_FILE = "config.toml"
CHECKPOINT_DIR = "checkpoint"
CURVES_FILE = "learning_curves.png"

_UNSAFE = re.compile(r"[^A-Za-z0-9._-]+")


class RunRegistry:
    """Create, persist and enumerate training runs under one output directory."""

    def __init__(self, root: str | Path) -> None:
        self.root = Path(root)
        self.runs_dir = self.root / RUNS_DIR

    def run_dir(self, run_id: str) -> Path:
        return self.runs_dir / run_id

    def create_run(self, *parts: Any) -> tuple[str, Path]:
        """New unique run id built from ``parts`` plus a short random suffix."""
        stem = "-".join(_UNSAFE.sub("_", str(p)) for p in parts if p not in (None, ""))
        while True:
            run_id = f"{stem}-{uuid.uuid4().hex[:8]}" if stem else uuid.uuid4().hex[:12]
            path = self.run_dir(run_id)
            try:
                path.mkdir(parents=True, exist_ok=False)
                return run_id, path
            except FileExistsError:
                continue

    def save(
        self,
        record: RunRecord,
        checkpoint: WeightArchive | None = None,
        config: dict[str, Any] | None = None,
        figures: bool = True,
    ) -> Path:
        """Persist a record, and optionally its checkpoint and resolved config."""
        path = self.run_dir(record.run_id)
        path.mkdir(parents=True, exist_ok=True)

        if checkpoint is not None:
            checkpoint.save(path / CHECKPOINT_DIR)
            record.checkpoint = str(path / CHECKPOINT_DIR)
        if config is not None:
            write_toml(path / CONFIG_FILE, config)

        record.to_dataframe().to_csv(path / METRICS_FILE, index=False)
        tmp = path / (RECORD_FILE + ".tmp")
        tmp.write_text(json.dumps(record.to_dict(), indent=2))
        os.replace(tmp, path / RECORD_FILE)

        if figures and record.epochs:
            self._save_curves(record, path)
        logger.debug(f"Saved run {record.run_id} to {path}")
        return path

    @staticmethod
    def _save_curves(record: RunRecord, path: Path) -> None:
        try:
            from audioxfer.visualization.training import plot_learning_curves, save_figure
        except ImportError:
            return
        try:
            save_figure(plot_learning_curves(record), path / CURVES_FILE)
        except ImportError:
            logger.debug("matplotlib not installed; skipping learning curves")

    def load(self, run_id: str) -> RunRecord:
        """Read a run's record.

        Raises:
            MissingArtifactError: No such run
        """
        path = self.run_dir(run_id) / RECORD_FILE
        if not path.exists():
            raise MissingArtifactError(f"No run '{run_id}' in {self.runs_dir}")
        return RunRecord.from_dict(json.loads(path.read_text()))

    def list_records(self, where: Callable[[RunRecord], bool] | None = None) -> list[RunRecord]:
        """All records, sorted by run id, optionally filtered."""
        if not self.runs_dir.is_dir():
            return []
        records = []
        for d in sorted(self.runs_dir.iterdir()):
            if (d / RECORD_FILE).exists():
                record = RunRecord.from_dict(json.loads((d / RECORD_FILE).read_text()))
                if where is None or where(record):
                    records.append(record)
        return records
