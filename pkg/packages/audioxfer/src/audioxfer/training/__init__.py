"""Training, evaluation and cross-validation.

Usage:
    from audioxfer.training import TrainConfig, RunRegistry, train_model

    record = train_model(model, store, plan, TrainConfig(regime="pretrained"), RunRegistry("out"))
"""

from audioxfer.training.config import (
    REGIME_SCHEDULES,
    Regime,
    TrainConfig,
    WeightDecayMode,
    scheduled_lr,
)
from audioxfer.training.cross_validation import backbone_factory, cross_validate
from audioxfer.training.evaluation import evaluate_model, evaluate_split, predict_logits
from audioxfer.training.pretrain import pretrain_tiny_archive
from audioxfer.training.registry import RunRegistry
from audioxfer.training.trainer import make_optimizer, train_model, train_step
from audioxfer.training.types import (
    STATUS_COMPLETED,
    STATUS_DIVERGED,
    CrossValidationResult,
    EpochMetrics,
    Metrics,
    RunRecord,
)

__all__ = [
    "CrossValidationResult",
    "EpochMetrics",
    "Metrics",
    "REGIME_SCHEDULES",
    "Regime",
    "RunRecord",
    "RunRegistry",
    "STATUS_COMPLETED",
    "STATUS_DIVERGED",
    "TrainConfig",
    "WeightDecayMode",
    "backbone_factory",
    "cross_validate",
    "evaluate_model",
    "evaluate_split",
    "make_optimizer",
    "predict_logits",
    "pretrain_tiny_archive",
    "scheduled_lr",
    "train_model",
    "train_step",
]
