"""Produce the tiny backbone's "pretrained" archive from the tone corpus."""

import logging
from pathlib import Path

from audioxfer.datasets.models import FoldPlan
from audioxfer.datasets.store import FeatureStore
from audioxfer.models.archive import PROVENANCE_TONES, WeightArchive
from audioxfer.models.types import Architecture, InitMode
from audioxfer.models.zoo import build_backbone, export_archive
from audioxfer.training.config import TrainConfig
from audioxfer.training.trainer import train_model

logger = logging.getLogger(__name__)


def pretrain_tiny_archive(
    store: FeatureStore,
    plan: FoldPlan,
    cfg: TrainConfig,
    out_dir: str | Path | None = None,
) -> WeightArchive:
    """Train the tiny backbone from scratch and export stem..block4.

    The classifier is never exported.
    """
    _, n_mels, width = store.shape
    m = build_backbone(
        Architecture.TINY,
        InitMode.RANDOM,
        store.num_classes,
        seed=cfg.seed,
        input_size=(n_mels, width),
    )
    record = train_model(m, store, plan, cfg, experiment="pretrain")
    archive = export_archive(
        m,
        provenance=PROVENANCE_TONES,
        metadata={"pretrain_val_accuracy": record.final_val_accuracy},
    )
    if out_dir is not None:
        archive.save(out_dir)
        logger.info(f"Saved tiny pretrained archive to {out_dir}")
    return archive
