"""Serve cached features to training and analysis code."""

import logging
from collections.abc import Iterator, Sequence

import numpy as np
import torch
from torch.utils.data import DataLoader, Dataset

from audioxfer.datasets.models import DatasetKind, FoldPlan, Split
from audioxfer.datasets.store import FeatureStore
from audioxfer.dsp.types import MelTensor
from audioxfer.errors import IntegrityError

logger = logging.getLogger(__name__)


def check_coverage(store: FeatureStore, plan: FoldPlan) -> None:
    """Raise IntegrityError unless the store holds a base record for every plan id."""
    if DatasetKind(plan.dataset_kind) != store.dataset_kind:
        raise IntegrityError(
            f"Plan is for {DatasetKind(plan.dataset_kind).value}, "
            f"store {store.root} holds {store.dataset_kind.value}"
        )
    missing = [cid for cid in (*plan.train_ids, *plan.val_ids) if cid not in store]
    if missing:
        raise IntegrityError(
            f"Feature store {store.root} lacks {len(missing)} plan clip(s), e.g. '{missing[0]}'"
        )


def record_keys(
    store: FeatureStore, plan: FoldPlan, split: Split | str, include_augmented: bool = False
) -> list[str]:
    """Record keys for one split. Validation never gets augmented records."""
    split = Split(split)
    augmented = include_augmented and split == Split.TRAIN
    keys: list[str] = []
    for clip_id in plan.ids(split):
        keys.extend(store.keys_for(clip_id, include_augmented=augmented))
    return keys


class FeatureDataset(Dataset[tuple[torch.Tensor, int]]):
    """Normalized feature tensors for a list of record keys."""

    def __init__(self, store: FeatureStore, keys: Sequence[str]) -> None:
        self.store = store
        self.keys = list(keys)
        for key in self.keys:
            if key not in store:
                raise IntegrityError(f"Feature store {store.root} has no record '{key}'")

    def __len__(self) -> int:
        return len(self.keys)

    def __getitem__(self, index: int) -> tuple[torch.Tensor, int]:
        key = self.keys[index]
        t = self.store.read_tensor(key)
        return torch.from_numpy(np.ascontiguousarray(t.values)), self.store.label(key)

    @property
    def labels(self) -> np.ndarray:
        return np.array([self.store.label(k) for k in self.keys], dtype=np.int64)


def load_examples(
    store: FeatureStore,
    plan: FoldPlan,
    split: Split | str,
    include_augmented: bool = False,
) -> Iterator[tuple[MelTensor, int]]:
    """Yield (normalized MelTensor, label) for a split.

    Raises:
        IntegrityError: A plan clip has no record (raised before anything is yielded)
    """
    keys = record_keys(store, plan, split, include_augmented)
    for key in keys:
        yield store.read_tensor(key), store.label(key)


def make_loader(
    store: FeatureStore,
    keys: Sequence[str],
    batch_size: int,
    shuffle: bool = False,
    seed: int = 0,
) -> DataLoader[tuple[torch.Tensor, int]]:
    """DataLoader whose shuffle order is drawn from ``seed``."""
    generator = torch.Generator()
    generator.manual_seed(seed)
    return DataLoader(
        FeatureDataset(store, keys),
        batch_size=batch_size,
        shuffle=shuffle,
        generator=generator,
        num_workers=0,
    )
