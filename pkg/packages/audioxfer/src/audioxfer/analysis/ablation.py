"""Weight fusion, weight freeze and model cutoff sweeps."""

import logging
import math
from collections.abc import Sequence
from pathlib import Path
from typing import Any

from audioxfer.analysis.types import AblationCurve, AblationKind
from audioxfer.datasets.models import FoldPlan
from audioxfer.datasets.store import FeatureStore
from audioxfer.errors import DivergedRunError, DomainError
from audioxfer.models.archive import WeightArchive
from audioxfer.models.handle import ModelHandle
from audioxfer.models.types import CONV_SEGMENTS, CUTOFF_POINTS, Architecture, InitMode
from audioxfer.models.zoo import build_backbone, fuse_weights, set_trainable, truncate_after
from audioxfer.training.config import TrainConfig
from audioxfer.training.registry import RunRegistry
from audioxfer.training.trainer import train_model

logger = logging.getLogger(__name__)

CUT_POINTS: dict[AblationKind, tuple[str, ...]] = {
    AblationKind.FUSION: CONV_SEGMENTS,
    AblationKind.FREEZE: CONV_SEGMENTS,
    AblationKind.CUTOFF: ("block2", "block3", "block4"),
}


def build_ablation_model(
    kind: AblationKind | str,
    cut: str,
    architecture: Architecture | str,
    archive: WeightArchive,
    num_classes: int,
    input_size: tuple[int, int],
    seed: int,
    depth: int | None = None,
) -> ModelHandle:
    """Model for one cut point of an ablation."""
    kind = AblationKind(kind)
    if cut not in CUT_POINTS[kind]:
        raise DomainError(f"Invalid {kind.value} cut point '{cut}'; expected one of {CUT_POINTS[kind]}")
    if kind == AblationKind.FUSION:
        return fuse_weights(archive, cut, num_classes, architecture, depth, input_size, seed)

    m = build_backbone(
        architecture, InitMode.PRETRAINED, num_classes,
        depth=depth, archive=archive, seed=seed, input_size=input_size,
    )
    if kind == AblationKind.FREEZE:
        return set_trainable(m, cut)
    return truncate_after(m, cut, num_classes, seed=seed)


def run_ablation_suite(
    kind: AblationKind | str,
    architecture: Architecture | str,
    store: FeatureStore,
    plan: FoldPlan,
    cfg: TrainConfig,
    archive: WeightArchive,
    registry: RunRegistry | None = None,
    cut_points: Sequence[str] | None = None,
    depth: int | None = None,
    config: dict[str, Any] | None = None,
) -> AblationCurve:
    """Train one model per cut point and record its validation accuracy.

    Every point uses the same seed and schedule. A diverged point gets NaN
    accuracy and marks the curve partial.

    Raises:
        DomainError: A cut point is invalid for the kind
    """
    kind = AblationKind(kind)
    points = list(cut_points or CUT_POINTS[kind])
    invalid = [p for p in points if p not in CUT_POINTS[kind]]
    if invalid:
        raise DomainError(f"Invalid {kind.value} cut point(s) {invalid}; expected {CUT_POINTS[kind]}")

    _, n_mels, width = store.shape
    ys: list[float] = []
    run_ids: list[str] = []
    partial = False
    for cut in points:
        m = build_ablation_model(
            kind, cut, architecture, archive, store.num_classes, (n_mels, width), cfg.seed, depth
        )
        frozen = m.net.frozen
        tags: dict[str, Any] = {"ablation": kind.value, "cut_point": cut}
        before = m.checksum(frozen) if frozen else None
        try:
            record = train_model(
                m, store, plan, cfg, registry, experiment=kind.value, config=config, tags=tags
            )
        except DivergedRunError as e:
            logger.warning(f"{kind.value} point {cut} diverged at epoch {e.epoch}")
            partial = True
            ys.append(math.nan)
            run_ids.append(e.record.run_id if e.record is not None else "")
            continue
        if before is not None:
            record.tags["frozen_checksum_before"] = before
            record.tags["frozen_checksum_after"] = m.checksum(frozen)
            if registry is not None:
                registry.save(record, figures=False)
        ys.append(float(record.final_val_accuracy or 0.0))
        run_ids.append(record.run_id)
        logger.info(f"{kind.value} cut={cut}: val accuracy {ys[-1]:.4f}")

    return AblationCurve(
        kind=kind,
        x=points,
        y=ys,
        run_ids=run_ids,
        partial=partial,
        label=kind.value,
        extra={"architecture": Architecture(architecture).value, "fold": plan.label},
    )


def save_ablation_curve(curve: AblationCurve, out_dir: str | Path) -> tuple[Path, Path | None]:
    """Write ``<kind>.csv`` and, when matplotlib is available, ``<kind>.png``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    name = AblationKind(curve.kind).value
    csv_path = out / f"{name}.csv"
    curve.to_dataframe().to_csv(csv_path, index=False)
    try:
        from audioxfer.visualization import plot_ablation_curve, save_figure

        png_path: Path | None = save_figure(plot_ablation_curve([curve]), out / f"{name}.png")
    except ImportError:
        logger.warning("matplotlib not installed; skipping ablation plot")
        png_path = None
    return csv_path, png_path
