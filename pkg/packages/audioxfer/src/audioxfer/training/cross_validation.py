"""Cross-validation over every fold of a corpus."""

import logging
from collections.abc import Callable, Iterable
from typing import Any

from audioxfer.datasets.models import FoldPlan
from audioxfer.datasets.store import FeatureStore
from audioxfer.errors import DivergedRunError
from audioxfer.models.archive import WeightArchive
from audioxfer.models.handle import ModelHandle
from audioxfer.models.types import Architecture, InitMode
from audioxfer.models.zoo import build_backbone
from audioxfer.training.config import TrainConfig
from audioxfer.training.registry import RunRegistry
from audioxfer.training.trainer import train_model
from audioxfer.training.types import CrossValidationResult, RunRecord

logger = logging.getLogger(__name__)

ModelFactory = Callable[[FoldPlan], ModelHandle]


def backbone_factory(
    architecture: Architecture | str,
    init_mode: InitMode | str,
    store: FeatureStore,
    seed: int,
    depth: int | None = None,
    archive: WeightArchive | None = None,
) -> ModelFactory:
    """Factory building the same backbone for every fold."""
    _, n_mels, width = store.shape

    def build(plan: FoldPlan) -> ModelHandle:
        return build_backbone(
            architecture,
            init_mode,
            store.num_classes,
            depth=depth,
            archive=archive,
            seed=seed,
            input_size=(n_mels, width),
        )

    return build


def cross_validate(
    architecture: Architecture | str,
    init_mode: InitMode | str,
    store: FeatureStore,
    plans: Iterable[FoldPlan],
    cfg: TrainConfig,
    registry: RunRegistry | None = None,
    depth: int | None = None,
    archive: WeightArchive | None = None,
    experiment: str = "cv",
    config: dict[str, Any] | None = None,
    model_factory: ModelFactory | None = None,
) -> CrossValidationResult:
    """One run per fold; aggregate accuracy is the mean of fold accuracies.

    A diverged fold is kept (its record persisted) and the result is
    marked incomplete.
    """
    plans = list(plans)
    build = model_factory or backbone_factory(
        architecture, init_mode, store, cfg.seed, depth=depth, archive=archive
    )

    records: list[RunRecord] = []
    for plan in plans:
        m = build(plan)
        try:
            records.append(
                train_model(m, store, plan, cfg, registry, experiment=experiment, config=config)
            )
        except DivergedRunError as e:
            logger.warning(f"Fold {plan.label} diverged at epoch {e.epoch}; aggregate will be incomplete")
            if e.record is not None:
                records.append(e.record)

    result = CrossValidationResult.from_records(records, expected_runs=len(plans))
    logger.info(f"Cross-validation {Architecture(architecture).value}/{InitMode(init_mode).value}: {result.summary()}")
    return result
