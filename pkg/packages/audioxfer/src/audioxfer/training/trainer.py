"""Single-run training loop."""

from __future__ import annotations

import logging
import math
import time
from typing import Any

import torch

from audioxfer.datasets.loader import check_coverage, make_loader, record_keys
from audioxfer.datasets.models import FoldPlan, Split
from audioxfer.datasets.store import FeatureStore
from audioxfer.errors import ConfigurationError, DivergedRunError, IntegrityError
from audioxfer.models.handle import ModelHandle
from audioxfer.models.types import Architecture, InitMode
from audioxfer.models.zoo import export_archive
from audioxfer.training.config import TrainConfig, WeightDecayMode, scheduled_lr
from audioxfer.training.evaluation import evaluate_split
from audioxfer.training.registry import RunRegistry
from audioxfer.training.types import STATUS_DIVERGED, EpochMetrics, RunRecord

logger = logging.getLogger(__name__)


def make_optimizer(m: ModelHandle, cfg: TrainConfig) -> torch.optim.Optimizer:
    """Adam with L2-coupled decay, or AdamW with decoupled decay."""
    params = m.trainable_parameters()
    if not params:
        raise ConfigurationError("Model has no trainable parameters")
    if WeightDecayMode(cfg.weight_decay_mode) == WeightDecayMode.DECOUPLED:
        return torch.optim.AdamW(params, lr=cfg.base_lr, weight_decay=cfg.weight_decay)
    return torch.optim.Adam(params, lr=cfg.base_lr, weight_decay=cfg.weight_decay)


def set_lr(optimizer: torch.optim.Optimizer, lr: float) -> None:
    for group in optimizer.param_groups:
        group["lr"] = lr


def train_step(
    m: ModelHandle, optimizer: torch.optim.Optimizer, x: torch.Tensor, y: torch.Tensor
) -> tuple[float, int]:
    """One optimization step. Returns (loss, correct predictions)."""
    optimizer.zero_grad(set_to_none=True)
    logits = m.forward(x)
    y = y.to(logits.device)
    loss = torch.nn.functional.cross_entropy(logits, y)
    value = float(loss.detach())
    if not math.isfinite(value):
        return value, 0
    loss.backward()
    optimizer.step()
    return value, int((logits.argmax(dim=1) == y).sum())


def _new_record(
    m: ModelHandle,
    store: FeatureStore,
    plan: FoldPlan,
    cfg: TrainConfig,
    run_id: str,
    experiment: str,
    tags: dict[str, Any] | None,
) -> RunRecord:
    return RunRecord(
        run_id=run_id,
        dataset=store.dataset_kind.value,
        architecture=Architecture(m.architecture).value,
        init_mode=InitMode(m.init_mode).value,
        topology=m.topology.to_dict(),
        train_config=cfg.model_dump(mode="json"),
        fold_index=plan.fold_index,
        split_seed=plan.seed,
        seed=cfg.seed,
        experiment=experiment,
        frozen_through=m.frozen_through,
        pretrained_through=m.pretrained_through,
        weight_decay_mode=str(cfg.weight_decay_mode),
        store_hash=store.config_hash,
        tags=dict(tags or {}),
    )


def train_model(
    m: ModelHandle,
    store: FeatureStore,
    plan: FoldPlan,
    cfg: TrainConfig,
    registry: RunRegistry | None = None,
    experiment: str = "",
    config: dict[str, Any] | None = None,
    tags: dict[str, Any] | None = None,
) -> RunRecord:
    """Train ``m`` on the plan's train split and validate every epoch.

    Mini-batch order and dropout draw from ``cfg.seed``. The final weights
    become the run checkpoint when a registry is given.

    Args:
        m: Model to train (modified in place)
        store: Feature store covering the plan
        plan: Train/validation partition
        cfg: Hyperparameters
        registry: Where to persist the run (None = keep in memory)
        experiment: Tag grouping related runs (e.g. "fusion")
        config: Resolved experiment config written next to the run
        tags: Extra key/values stored on the record

    Returns:
        Completed RunRecord

    Raises:
        IntegrityError: Store does not cover the plan, or class counts differ
        DivergedRunError: Loss became non-finite (record persisted first)
    """
    check_coverage(store, plan)
    if m.num_classes != store.num_classes:
        raise IntegrityError(
            f"Model emits {m.num_classes} classes, store has {store.num_classes}"
        )

    if registry is not None:
        run_id, _ = registry.create_run(
            experiment, store.dataset_kind.value, m.topology.name,
            InitMode(m.init_mode).value, plan.label, f"s{cfg.seed}",
        )
    else:
        run_id = f"{experiment or 'run'}-{plan.label}-s{cfg.seed}"
    record = _new_record(m, store, plan, cfg, run_id, experiment, tags)

    torch.manual_seed(cfg.seed)
    train_keys = record_keys(store, plan, Split.TRAIN, include_augmented=cfg.include_augmented)
    loader = make_loader(store, train_keys, cfg.batch_size, shuffle=True, seed=cfg.seed)
    optimizer = make_optimizer(m, cfg)

    logger.info(
        f"Run {run_id}: {m.topology.name}/{InitMode(m.init_mode).value} on "
        f"{store.dataset_kind.value} {plan.label}, {len(train_keys)} train records, "
        f"{len(plan.val_ids)} val clips, {cfg.num_epochs} epochs"
    )
    started = time.perf_counter()
    for epoch in range(cfg.num_epochs):
        lr = scheduled_lr(epoch, cfg)
        set_lr(optimizer, lr)
        m.net.train()

        total_loss, correct, seen = 0.0, 0, 0
        for x, y in loader:
            loss, hits = train_step(m, optimizer, x, y)
            if not math.isfinite(loss):
                record.status = STATUS_DIVERGED
                record.wall_clock_s = time.perf_counter() - started
                logger.error(f"Run {run_id} diverged at epoch {epoch}: loss={loss}")
                if registry is not None:
                    registry.save(record, config=config)
                raise DivergedRunError(epoch, record)
            total_loss += loss * len(y)
            correct += hits
            seen += len(y)

        val_loss, val_metrics = evaluate_split(m, store, plan.val_ids)
        em = EpochMetrics(
            epoch=epoch,
            lr=lr,
            train_loss=total_loss / max(seen, 1),
            train_accuracy=correct / max(seen, 1),
            val_loss=val_loss,
            val_accuracy=val_metrics.accuracy,
        )
        record.epochs.append(em)
        logger.info(
            f"epoch {epoch + 1}/{cfg.num_epochs} lr={lr:.1e} "
            f"train_loss={em.train_loss:.4f} train_acc={em.train_accuracy:.4f} "
            f"val_loss={em.val_loss:.4f} val_acc={em.val_accuracy:.4f}"
        )

    record.final_metrics = val_metrics.to_dict()
    record.wall_clock_s = time.perf_counter() - started

    if registry is not None:
        checkpoint = export_archive(
            m,
            include_classifier=True,
            metadata={
                "frozen_through": m.frozen_through,
                "pretrained_through": m.pretrained_through,
                "run_id": run_id,
            },
        )
        registry.save(record, checkpoint=checkpoint, config=config)

    logger.info(record.summary())
    return record
