"""Accuracy tables built from run records and ensemble descriptors.

Cells hold percentages with two decimals ("91.16"); "-" marks a missing
combination. Single-model cells average the completed single runs of a
(dataset, architecture, init) group; the "±" spread is the population
standard deviation across those runs (folds).
"""

from collections.abc import Iterable, Sequence
from typing import Any

import numpy as np
import pandas as pd

from audioxfer.datasets.models import DatasetKind, dataset_info
from audioxfer.models.types import Architecture, InitMode
from audioxfer.training.types import RunRecord

SINGLE_RUN_EXPERIMENTS = ("", "train", "cv")
MISSING = "-"

MODEL_NAMES = {
    Architecture.DENSENET.value: "DenseNet",
    Architecture.RESNET.value: "ResNet",
    Architecture.INCEPTION.value: "Inception",
    Architecture.TINY.value: "Tiny",
}
DATASET_ORDER = (
    DatasetKind.GTZAN.value,
    DatasetKind.ESC50.value,
    DatasetKind.URBANSOUND8K.value,
    DatasetKind.TONES.value,
)
ARCH_ORDER = tuple(MODEL_NAMES)


def format_percent(value: float | None) -> str:
    if value is None or not np.isfinite(value):
        return MISSING
    return f"{value * 100:.2f}"


def format_mean_std(values: Sequence[float]) -> str:
    if not values:
        return MISSING
    return f"{np.mean(values) * 100:.2f}±{np.std(values) * 100:.2f}"


def dataset_title(kind: str) -> str:
    return dataset_info(kind).directory


def model_title(architecture: str) -> str:
    return MODEL_NAMES.get(architecture, architecture)


def single_run_accuracies(records: Iterable[RunRecord]) -> pd.DataFrame:
    """One row per completed single-model run."""
    rows = [
        {
            "dataset": r.dataset,
            "architecture": r.architecture,
            "init_mode": r.init_mode,
            "run_id": r.run_id,
            "accuracy": r.final_val_accuracy,
        }
        for r in records
        if r.is_completed and r.experiment in SINGLE_RUN_EXPERIMENTS and r.final_val_accuracy is not None
    ]
    return pd.DataFrame(rows, columns=["dataset", "architecture", "init_mode", "run_id", "accuracy"])


def _ordered(values: Iterable[str], order: Sequence[str]) -> list[str]:
    present = set(values)
    return [v for v in order if v in present] + sorted(present - set(order))


def _group_accuracies(df: pd.DataFrame) -> dict[tuple[str, str, str], list[float]]:
    groups: dict[tuple[str, str, str], list[float]] = {}
    for row in df.itertuples(index=False):
        groups.setdefault((row.dataset, row.architecture, row.init_mode), []).append(float(row.accuracy))
    return groups


def _ensemble_accuracies(ensembles: Iterable[dict[str, Any]]) -> dict[tuple[str, str, str], list[float]]:
    groups: dict[tuple[str, str, str], list[float]] = {}
    for d in ensembles:
        key = (d["dataset"], d["architecture"], d.get("init_mode", InitMode.PRETRAINED.value))
        groups.setdefault(key, []).append(float(d["ensemble_accuracy"]))
    return groups


def _mean(values: Sequence[float] | None) -> float | None:
    return float(np.mean(values)) if values else None


def table_pretrained_vs_random(records: Iterable[RunRecord]) -> pd.DataFrame:
    """Pretrained and random accuracy per dataset, one row per architecture."""
    df = single_run_accuracies(records)
    groups = _group_accuracies(df)
    datasets = _ordered(df["dataset"], DATASET_ORDER)
    rows = []
    for arch in _ordered(df["architecture"], ARCH_ORDER):
        row = {"Model": model_title(arch)}
        for ds in datasets:
            for mode, title in ((InitMode.PRETRAINED.value, "Pretrained"), (InitMode.RANDOM.value, "Random")):
                row[f"{dataset_title(ds)} {title}"] = format_percent(_mean(groups.get((ds, arch, mode))))
        rows.append(row)
    columns = ["Model"] + [
        f"{dataset_title(ds)} {t}" for ds in datasets for t in ("Pretrained", "Random")
    ]
    return pd.DataFrame(rows, columns=columns)


def table_single_vs_ensemble(
    records: Iterable[RunRecord], ensembles: Iterable[dict[str, Any]]
) -> pd.DataFrame:
    """Pretrained single-model mean±std next to ensemble accuracy."""
    df = single_run_accuracies(records)
    df = df[df["init_mode"] == InitMode.PRETRAINED.value]
    singles = _group_accuracies(df)
    ens = _ensemble_accuracies(ensembles)
    pretrained = InitMode.PRETRAINED.value
    datasets = _ordered(
        list(df["dataset"]) + [k[0] for k in ens if k[2] == pretrained], DATASET_ORDER
    )
    archs = _ordered(
        list(df["architecture"]) + [k[1] for k in ens if k[2] == pretrained], ARCH_ORDER
    )
    rows = []
    for arch in archs:
        row = {"Model": f"{model_title(arch)} (Pretrained)"}
        for ds in datasets:
            row[f"{dataset_title(ds)} Single"] = format_mean_std(singles.get((ds, arch, pretrained), []))
            row[f"{dataset_title(ds)} Ensemble"] = format_percent(_mean(ens.get((ds, arch, pretrained))))
        rows.append(row)
    columns = ["Model"] + [f"{dataset_title(ds)} {t}" for ds in datasets for t in ("Single", "Ensemble")]
    return pd.DataFrame(rows, columns=columns)


def table_overall(
    records: Iterable[RunRecord],
    ensembles: Iterable[dict[str, Any]],
    architecture: Architecture | str = Architecture.DENSENET,
) -> pd.DataFrame:
    """Random, pretrained and pretrained-ensemble rows for one architecture."""
    arch = Architecture(architecture).value
    df = single_run_accuracies(records)
    singles = _group_accuracies(df)
    ens_list = list(ensembles)
    ens = _ensemble_accuracies(ens_list)
    datasets = _ordered(list(df["dataset"]) + [d["dataset"] for d in ens_list], DATASET_ORDER)
    name = model_title(arch)
    random_mode, pretrained = InitMode.RANDOM.value, InitMode.PRETRAINED.value

    rows = [
        {"Model": f"{name} (Random)", **{
            dataset_title(ds): format_percent(_mean(singles.get((ds, arch, random_mode)))) for ds in datasets
        }},
        {"Model": f"{name} (Pretrained)", **{
            dataset_title(ds): format_percent(_mean(singles.get((ds, arch, pretrained)))) for ds in datasets
        }},
        {"Model": f"{name} (Pretrained Ensemble)", **{
            dataset_title(ds): format_percent(_mean(ens.get((ds, arch, pretrained)))) for ds in datasets
        }},
    ]
    return pd.DataFrame(rows, columns=["Model"] + [dataset_title(ds) for ds in datasets])
