"""Dataset inventory types."""

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any

import pandas as pd


class DatasetKind(str, Enum):
    """Supported corpora."""

    ESC50 = "esc50"
    URBANSOUND8K = "urbansound8k"
    GTZAN = "gtzan"
    TONES = "tones"


class Split(str, Enum):
    TRAIN = "train"
    VAL = "val"


@dataclass(frozen=True)
class DatasetInfo:
    """Fixed facts about a corpus.

    Attributes:
        sample_rate: Rate every clip is resampled to
        duration_s: Nominal clip length; clips are padded or trimmed to it
        width: Feature tensor width in frames
        expected_entries: Clip count the metadata must list (None = any)
        expected_classes: Class count (None = any)
        n_folds: Official folds (0 = seeded split)
        directory: Default directory name under the data root
    """

    sample_rate: int
    duration_s: float
    width: int
    expected_entries: int | None
    expected_classes: int | None
    n_folds: int
    directory: str

    @property
    def n_samples(self) -> int:
        return int(round(self.sample_rate * self.duration_s))

    @property
    def is_folded(self) -> bool:
        return self.n_folds > 0


DATASET_INFO: dict[DatasetKind, DatasetInfo] = {
    DatasetKind.ESC50: DatasetInfo(44100, 5.0, 250, 2000, 50, 5, "ESC-50"),
    DatasetKind.URBANSOUND8K: DatasetInfo(22050, 4.0, 250, 8732, 10, 10, "UrbanSound8K"),
    DatasetKind.GTZAN: DatasetInfo(22050, 30.0, 1500, 1000, 10, 0, "GTZAN"),
    DatasetKind.TONES: DatasetInfo(22050, 0.5, 32, None, 2, 5, "tones"),
}

GTZAN_VAL_FRACTION = 0.2


def dataset_info(kind: DatasetKind | str) -> DatasetInfo:
    return DATASET_INFO[DatasetKind(kind)]


@dataclass(frozen=True)
class ClipEntry:
    """One clip in a manifest."""

    clip_id: str
    path: Path
    label: int
    class_name: str
    fold: int | None
    duration: float | None = None
    source_sr: int | None = None


@dataclass
class DatasetManifest:
    """All clips of a corpus with labels and fold assignments."""

    dataset_kind: DatasetKind
    entries: list[ClipEntry]
    class_names: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def info(self) -> DatasetInfo:
        return dataset_info(self.dataset_kind)

    @property
    def num_classes(self) -> int:
        return len(self.class_names)

    @property
    def clip_ids(self) -> list[str]:
        return [e.clip_id for e in self.entries]

    def folds(self) -> list[int]:
        return sorted({e.fold for e in self.entries if e.fold is not None})

    def by_id(self) -> dict[str, ClipEntry]:
        return {e.clip_id: e for e in self.entries}

    def to_dataframe(self) -> pd.DataFrame:
        return pd.DataFrame(
            [
                {
                    "clip_id": e.clip_id,
                    "path": str(e.path),
                    "label": e.label,
                    "class_name": e.class_name,
                    "fold": e.fold,
                    "duration": e.duration,
                    "source_sr": e.source_sr,
                }
                for e in self.entries
            ]
        )


@dataclass(frozen=True)
class FoldPlan:
    """Train/validation partition of a manifest.

    ``fold_index`` is set for folded corpora, ``seed`` for seeded splits.
    """

    dataset_kind: DatasetKind
    train_ids: tuple[str, ...]
    val_ids: tuple[str, ...]
    fold_index: int | None = None
    seed: int | None = None

    def ids(self, split: Split | str) -> tuple[str, ...]:
        return self.train_ids if Split(split) == Split.TRAIN else self.val_ids

    @property
    def label(self) -> str:
        """Short tag used in run ids and reports."""
        if self.fold_index is not None:
            return f"fold{self.fold_index}"
        return f"seed{self.seed}"

    def to_dict(self) -> dict[str, Any]:
        return {
            "dataset_kind": DatasetKind(self.dataset_kind).value,
            "fold_index": self.fold_index,
            "seed": self.seed,
            "n_train": len(self.train_ids),
            "n_val": len(self.val_ids),
        }
