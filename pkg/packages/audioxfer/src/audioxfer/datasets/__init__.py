"""Corpus ingestion, fold splits and the feature cache.

Usage:
    from audioxfer.datasets import build_manifest, split_folds, cache_features

    manifest = build_manifest("esc50", "/data/ESC-50")
    plan = split_folds(manifest, fold_index=1)
    store = cache_features(manifest, DspConfig(), AugmentationPolicy(), "features/esc50")
"""

from audioxfer.datasets.loader import (
    FeatureDataset,
    check_coverage,
    load_examples,
    make_loader,
    record_keys,
)
from audioxfer.datasets.manifest import build_manifest, check_integrity
from audioxfer.datasets.models import (
    DATASET_INFO,
    ClipEntry,
    DatasetInfo,
    DatasetKind,
    DatasetManifest,
    FoldPlan,
    Split,
    dataset_info,
)
from audioxfer.datasets.splits import (
    OfficialFoldSplit,
    StratifiedHoldout,
    iter_folds,
    split_folds,
)
from audioxfer.datasets.store import FeatureStore, RecordInfo, cache_features
from audioxfer.datasets.synthetic import write_tone_dataset

__all__ = [
    "DATASET_INFO",
    "ClipEntry",
    "DatasetInfo",
    "DatasetKind",
    "DatasetManifest",
    "FeatureDataset",
    "FeatureStore",
    "FoldPlan",
    "OfficialFoldSplit",
    "RecordInfo",
    "Split",
    "StratifiedHoldout",
    "build_manifest",
    "cache_features",
    "check_coverage",
    "check_integrity",
    "dataset_info",
    "iter_folds",
    "load_examples",
    "make_loader",
    "record_keys",
    "split_folds",
    "write_tone_dataset",
]
