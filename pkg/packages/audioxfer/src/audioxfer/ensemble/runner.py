"""Train ensemble members and evaluate their softmax average.

Artifacts (``EnsembleResult.save``)::

    <out>/ensemble.json   root seed, member seeds, run ids, accuracies
    <out>/report.csv      one row per member plus an "ensemble" row
"""

from __future__ import annotations

import json
import logging
import os
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import pandas as pd

from audioxfer.datasets.models import FoldPlan
from audioxfer.datasets.store import FeatureStore
from audioxfer.ensemble.config import EnsembleConfig
from audioxfer.ensemble.predict import ensemble_evaluate
from audioxfer.errors import DivergedRunError, InsufficientMembersError
from audioxfer.models.archive import WeightArchive
from audioxfer.models.handle import ModelHandle
from audioxfer.models.types import Architecture, InitMode
from audioxfer.models.zoo import load_checkpoint
from audioxfer.training.config import TrainConfig
from audioxfer.training.cross_validation import backbone_factory
from audioxfer.training.registry import RunRegistry
from audioxfer.training.trainer import train_model
from audioxfer.training.types import Metrics, RunRecord

logger = logging.getLogger(__name__)

DESCRIPTOR_FILE = "ensemble.json"
REPORT_FILE = "report.csv"
MIN_HEALTHY_MEMBERS = 2


@dataclass
class EnsembleRun:
    """Member records in seed order; ``models`` holds the healthy members' weights."""

    config: EnsembleConfig
    plan: FoldPlan
    records: list[RunRecord]
    models: list[ModelHandle] = field(default_factory=list, repr=False)

    @property
    def healthy(self) -> list[RunRecord]:
        return [r for r in self.records if r.is_completed]

    @property
    def diverged(self) -> list[RunRecord]:
        return [r for r in self.records if not r.is_completed]


@dataclass
class EnsembleResult:
    """Single-member accuracies next to the ensemble's."""

    root_seed: int
    seeds: list[int]
    records: list[RunRecord]
    metrics: Metrics
    excluded: list[str] = field(default_factory=list)
    dataset: str = ""
    architecture: str = ""
    init_mode: str = ""
    split: str = ""

    @property
    def accuracy(self) -> float:
        return self.metrics.accuracy

    @property
    def member_accuracies(self) -> dict[str, float | None]:
        return {r.run_id: r.final_val_accuracy for r in self.records}

    def to_dict(self) -> dict[str, Any]:
        return {
            "dataset": self.dataset,
            "architecture": self.architecture,
            "init_mode": self.init_mode,
            "split": self.split,
            "root_seed": self.root_seed,
            "seeds": list(self.seeds),
            "members": [
                {
                    "run_id": r.run_id,
                    "seed": r.seed,
                    "status": r.status,
                    "val_accuracy": r.final_val_accuracy,
                }
                for r in self.records
            ],
            "excluded": list(self.excluded),
            "ensemble_accuracy": self.accuracy,
            "metrics": self.metrics.to_dict(),
        }

    def to_dataframe(self) -> pd.DataFrame:
        rows = [
            {
                "member": r.run_id,
                "seed": r.seed,
                "status": r.status,
                "val_accuracy": r.final_val_accuracy,
            }
            for r in self.records
        ]
        rows.append(
            {"member": "ensemble", "seed": self.root_seed, "status": "", "val_accuracy": self.accuracy}
        )
        return pd.DataFrame(rows, columns=["member", "seed", "status", "val_accuracy"])

    def summary(self) -> str:
        accs = [a for a in self.member_accuracies.values() if a is not None]
        best = f", best member {max(accs):.2%}" if accs else ""
        return f"Ensemble of {len(self.records) - len(self.excluded)}: {self.accuracy:.2%}{best}"

    def save(self, out_dir: str | Path) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        self.to_dataframe().to_csv(out / REPORT_FILE, index=False)
        tmp = out / (DESCRIPTOR_FILE + ".tmp")
        tmp.write_text(json.dumps(self.to_dict(), indent=2))
        os.replace(tmp, out / DESCRIPTOR_FILE)
        return out


def run_ensemble(
    cfg: EnsembleConfig,
    architecture: Architecture | str,
    init_mode: InitMode | str,
    store: FeatureStore,
    plan: FoldPlan,
    train: TrainConfig,
    registry: RunRegistry | None = None,
    depth: int | None = None,
    archive: WeightArchive | None = None,
    config: dict[str, Any] | None = None,
) -> EnsembleRun:
    """Train one member per seed on the same fold.

    Members share architecture, schedule and (for PRETRAINED) the transferred
    convolutional weights; the seed drives the head initialization and the
    mini-batch order. A diverged member is kept, flagged by its status.
    """
    records: list[RunRecord] = []
    models: list[ModelHandle] = []
    for i, seed in enumerate(cfg.member_seeds):
        member_cfg = train.model_copy(update={"seed": seed})
        build = backbone_factory(architecture, init_mode, store, seed, depth=depth, archive=archive)
        m = build(plan)
        tags = {"ensemble_root_seed": cfg.root_seed, "ensemble_member": i}
        try:
            records.append(
                train_model(
                    m, store, plan, member_cfg, registry,
                    experiment="ensemble", config=config, tags=tags,
                )
            )
            models.append(m)
        except DivergedRunError as e:
            logger.warning(f"Ensemble member {i} (seed {seed}) diverged at epoch {e.epoch}; excluded")
            if e.record is not None:
                records.append(e.record)
    return EnsembleRun(config=cfg, plan=plan, records=records, models=models)


def load_members(records: Sequence[RunRecord]) -> list[ModelHandle]:
    """Reload the checkpoints of completed members."""
    return [load_checkpoint(r) for r in records if r.is_completed]


def evaluate_ensemble(
    run: EnsembleRun, store: FeatureStore, ids: Sequence[str] | None = None
) -> EnsembleResult:
    """Softmax-average evaluation over the healthy members.

    Raises:
        InsufficientMembersError: Fewer than two healthy members
    """
    models = run.models or load_members(run.healthy)
    if len(models) < MIN_HEALTHY_MEMBERS:
        raise InsufficientMembersError(
            f"Ensemble evaluation needs {MIN_HEALTHY_MEMBERS} healthy members, got {len(models)}"
        )
    excluded = [r.run_id for r in run.diverged]
    if excluded:
        logger.warning(f"Evaluating ensemble without diverged members {excluded}")
    eval_ids = list(ids) if ids is not None else list(run.plan.val_ids)
    metrics = ensemble_evaluate(models, store, eval_ids)
    first = run.healthy[0] if run.healthy else None
    result = EnsembleResult(
        root_seed=run.config.root_seed,
        seeds=list(run.config.member_seeds),
        records=run.records,
        metrics=metrics,
        excluded=excluded,
        dataset=store.dataset_kind.value,
        architecture=first.architecture if first else Architecture(models[0].architecture).value,
        init_mode=first.init_mode if first else InitMode(models[0].init_mode).value,
        split=run.plan.label,
    )
    logger.info(result.summary())
    return result
