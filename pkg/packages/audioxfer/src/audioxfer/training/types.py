"""Result types for training and evaluation."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np
import pandas as pd

from audioxfer.errors import DomainError

STATUS_COMPLETED = "completed"
STATUS_DIVERGED = "diverged"


@dataclass
class Metrics:
    """Classification metrics.

    Attributes:
        accuracy: Top-1 accuracy as a fraction
        per_class_accuracy: Recall per class (NaN where a class has no support)
        confusion: Counts, rows = true class, columns = predicted class
    """

    accuracy: float
    per_class_accuracy: np.ndarray
    confusion: np.ndarray

    @classmethod
    def from_predictions(
        cls, y_true: np.ndarray, y_pred: np.ndarray, num_classes: int
    ) -> Metrics:
        y_true = np.asarray(y_true, dtype=np.int64)
        y_pred = np.asarray(y_pred, dtype=np.int64)
        if y_true.size == 0:
            raise DomainError("Cannot compute metrics over zero examples")
        if y_true.shape != y_pred.shape:
            raise DomainError(f"Label shapes differ: {y_true.shape} vs {y_pred.shape}")
        flat = y_true * num_classes + y_pred
        confusion = np.bincount(flat, minlength=num_classes * num_classes).reshape(
            num_classes, num_classes
        )
        support = confusion.sum(axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            per_class = np.where(support > 0, np.diag(confusion) / np.maximum(support, 1), np.nan)
        return cls(
            accuracy=float(np.trace(confusion) / confusion.sum()),
            per_class_accuracy=per_class,
            confusion=confusion,
        )

    @property
    def support(self) -> np.ndarray:
        return self.confusion.sum(axis=1)

    @property
    def total(self) -> int:
        return int(self.confusion.sum())

    def to_dict(self) -> dict[str, Any]:
        return {
            "accuracy": self.accuracy,
            "per_class_accuracy": [None if np.isnan(v) else float(v) for v in self.per_class_accuracy],
            "confusion": self.confusion.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> Metrics:
        return cls(
            accuracy=float(d["accuracy"]),
            per_class_accuracy=np.array(
                [np.nan if v is None else v for v in d["per_class_accuracy"]], dtype=np.float64
            ),
            confusion=np.array(d["confusion"], dtype=np.int64),
        )


@dataclass
class EpochMetrics:
    """One epoch of a training run."""

    epoch: int
    lr: float
    train_loss: float
    train_accuracy: float
    val_loss: float
    val_accuracy: float


@dataclass
class RunRecord:
    """Everything a finished (or diverged) training run leaves behind.

    ``fold_index`` is set for folded corpora, ``split_seed`` for seeded
    splits. ``checkpoint`` is the archive directory of the final weights.
    """

    run_id: str
    dataset: str
    architecture: str
    init_mode: str
    topology: dict[str, Any]
    train_config: dict[str, Any]
    fold_index: int | None = None
    split_seed: int | None = None
    seed: int = 0
    experiment: str = ""
    frozen_through: str | None = None
    pretrained_through: str | None = None
    weight_decay_mode: str = "l2"
    epochs: list[EpochMetrics] = field(default_factory=list)
    final_metrics: dict[str, Any] | None = None
    checkpoint: str | None = None
    status: str = STATUS_COMPLETED
    wall_clock_s: float = 0.0
    store_hash: str | None = None
    tags: dict[str, Any] = field(default_factory=dict)

    @property
    def final_val_accuracy(self) -> float | None:
        if self.final_metrics is None:
            return None
        return float(self.final_metrics["accuracy"])

    @property
    def metrics(self) -> Metrics | None:
        return None if self.final_metrics is None else Metrics.from_dict(self.final_metrics)

    @property
    def is_completed(self) -> bool:
        return self.status == STATUS_COMPLETED

    @property
    def depth(self) -> int:
        return int(self.topology["depth"])

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> RunRecord:
        d = dict(d)
        d["epochs"] = [EpochMetrics(**e) for e in d.get("epochs", [])]
        return cls(**d)

    def to_dataframe(self) -> pd.DataFrame:
        """Per-epoch metrics, one row per epoch."""
        columns = ["epoch", "lr", "train_loss", "train_accuracy", "val_loss", "val_accuracy"]
        return pd.DataFrame([asdict(e) for e in self.epochs], columns=columns)

    def summary(self) -> str:
        acc = self.final_val_accuracy
        acc_text = f"{acc:.2%}" if acc is not None else "n/a"
        split = f"fold {self.fold_index}" if self.fold_index is not None else f"seed {self.split_seed}"
        return (
            f"{self.run_id}: {self.architecture}/{self.init_mode} on {self.dataset} ({split}), "
            f"{len(self.epochs)} epochs, val accuracy {acc_text}, {self.status}"
        )


@dataclass
class CrossValidationResult:
    """Per-fold runs and their aggregate.

    ``mean_accuracy`` is the arithmetic mean of per-fold accuracies;
    ``std_accuracy`` their population standard deviation.
    """

    records: list[RunRecord]
    fold_accuracies: list[float]
    mean_accuracy: float
    std_accuracy: float
    pooled_confusion: np.ndarray | None
    complete: bool

    @classmethod
    def from_records(cls, records: list[RunRecord], expected_runs: int | None = None) -> CrossValidationResult:
        done = [r for r in records if r.is_completed and r.final_metrics is not None]
        accs = [float(r.final_val_accuracy or 0.0) for r in done]
        confusions = [r.metrics.confusion for r in done if r.metrics is not None]
        pooled = np.sum(confusions, axis=0) if confusions else None
        complete = len(done) == len(records) and (expected_runs is None or len(records) == expected_runs)
        return cls(
            records=records,
            fold_accuracies=accs,
            mean_accuracy=float(np.mean(accs)) if accs else float("nan"),
            std_accuracy=float(np.std(accs)) if accs else float("nan"),
            pooled_confusion=pooled,
            complete=complete,
        )

    def to_dataframe(self) -> pd.DataFrame:
        return pd.DataFrame(
            [
                {
                    "run_id": r.run_id,
                    "fold_index": r.fold_index,
                    "split_seed": r.split_seed,
                    "status": r.status,
                    "val_accuracy": r.final_val_accuracy,
                }
                for r in self.records
            ]
        )

    def summary(self) -> str:
        flag = "" if self.complete else " (INCOMPLETE)"
        return (
            f"{len(self.fold_accuracies)}/{len(self.records)} folds: "
            f"{self.mean_accuracy:.2%} ± {self.std_accuracy:.2%}{flag}"
        )
