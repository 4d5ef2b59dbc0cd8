"""Cross-validation splits over a dataset manifest.

Folded corpora hold out one official fold at a time; corpora without folds
use a seeded, class-stratified holdout.
"""

from __future__ import annotations

from collections import defaultdict
from typing import Iterator

import numpy as np

from audioxfer.datasets.models import GTZAN_VAL_FRACTION, DatasetManifest, FoldPlan
from audioxfer.errors import DomainError


class OfficialFoldSplit:
    """Leave-one-fold-out over the corpus's published folds.

    Example:
        splitter = OfficialFoldSplit()
        for plan in splitter.split(manifest):
            ...  # plan.val_ids is one fold
    """

    def plan(self, manifest: DatasetManifest, fold_index: int) -> FoldPlan:
        folds = manifest.folds()
        if fold_index not in folds:
            raise DomainError(
                f"Fold {fold_index} out of range for {manifest.dataset_kind}; valid folds: {folds}"
            )
        train = tuple(e.clip_id for e in manifest.entries if e.fold != fold_index)
        val = tuple(e.clip_id for e in manifest.entries if e.fold == fold_index)
        return FoldPlan(manifest.dataset_kind, train, val, fold_index=fold_index)

    def split(self, manifest: DatasetManifest) -> Iterator[FoldPlan]:
        for fold in manifest.folds():
            yield self.plan(manifest, fold)


class StratifiedHoldout:
    """Seeded holdout with an equal number of validation clips per class."""

    def __init__(self, val_fraction: float = GTZAN_VAL_FRACTION) -> None:
        if not 0.0 < val_fraction < 1.0:
            raise DomainError(f"val_fraction must lie in (0, 1), got {val_fraction}")
        self.val_fraction = val_fraction

    def plan(self, manifest: DatasetManifest, seed: int) -> FoldPlan:
        by_class: dict[int, list[str]] = defaultdict(list)
        for e in manifest.entries:
            by_class[e.label].append(e.clip_id)

        # Equal count per class: the smallest class sets the quota.
        per_class = int(round(min(len(v) for v in by_class.values()) * self.val_fraction))
        if per_class < 1:
            raise DomainError("Validation split would be empty for at least one class")

        rng = np.random.default_rng(seed)
        val: set[str] = set()
        for label in sorted(by_class):
            ids = sorted(by_class[label])
            picked = rng.choice(len(ids), size=per_class, replace=False)
            val.update(ids[i] for i in picked)

        train = tuple(cid for cid in manifest.clip_ids if cid not in val)
        val_ids = tuple(cid for cid in manifest.clip_ids if cid in val)
        return FoldPlan(manifest.dataset_kind, train, val_ids, seed=seed)

    def split(self, manifest: DatasetManifest, seed: int) -> Iterator[FoldPlan]:
        yield self.plan(manifest, seed)


def split_folds(
    manifest: DatasetManifest,
    fold_index: int | None = None,
    seed: int | None = None,
) -> FoldPlan:
    """Partition a manifest into train and validation ids.

    Args:
        manifest: Dataset manifest
        fold_index: Held-out fold for folded corpora
        seed: Split seed for corpora without folds

    Raises:
        DomainError: Fold out of range, or the required argument is missing
    """
    if manifest.info.is_folded:
        if fold_index is None:
            raise DomainError(f"{manifest.dataset_kind} requires a fold_index")
        return OfficialFoldSplit().plan(manifest, fold_index)
    if seed is None:
        raise DomainError(f"{manifest.dataset_kind} requires a split seed")
    return StratifiedHoldout().plan(manifest, seed)


def iter_folds(manifest: DatasetManifest, seed: int = 0) -> Iterator[FoldPlan]:
    """Every official fold once, or the single seeded split."""
    if manifest.info.is_folded:
        yield from OfficialFoldSplit().split(manifest)
    else:
        yield from StratifiedHoldout().split(manifest, seed)
