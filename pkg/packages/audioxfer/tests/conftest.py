"""Shared fixtures built on the synthetic tone corpus.

Everything is generated locally, no download or GPU needed. The corpus,
its feature stores and the tiny pretrained archive are session-scoped so
the feature extraction and pretraining happen once per test run.
"""

from collections.abc import Callable
from pathlib import Path

import pytest

from audioxfer.datasets import (
    DatasetManifest,
    FeatureStore,
    FoldPlan,
    build_manifest,
    cache_features,
    split_folds,
    write_tone_dataset,
)
from audioxfer.dsp import AugmentationPolicy, DspConfig
from audioxfer.models import Architecture, InitMode, ModelHandle, WeightArchive, build_backbone
from audioxfer.training import TrainConfig, pretrain_tiny_archive

TONE_CLIPS = 100
AUGMENTED_CLIPS = 10


@pytest.fixture(scope="session")
def tone_root(tmp_path_factory: pytest.TempPathFactory) -> Path:
    """100-clip two-class tone corpus (steady vs pulsed)."""
    return write_tone_dataset(tmp_path_factory.mktemp("tones"), n_clips=TONE_CLIPS, seed=0)


@pytest.fixture(scope="session")
def tone_manifest(tone_root: Path) -> DatasetManifest:
    return build_manifest("tones", tone_root)


@pytest.fixture(scope="session")
def tone_store(tone_manifest: DatasetManifest, tmp_path_factory: pytest.TempPathFactory) -> FeatureStore:
    """Base records only."""
    return cache_features(
        tone_manifest, DspConfig(), AugmentationPolicy(), tmp_path_factory.mktemp("store")
    )


@pytest.fixture(scope="session")
def augmented_root(tmp_path_factory: pytest.TempPathFactory) -> Path:
    """Small corpus for augmentation tests; extraction is slower per clip."""
    return write_tone_dataset(
        tmp_path_factory.mktemp("tones-aug"), n_clips=AUGMENTED_CLIPS, seed=1
    )


@pytest.fixture(scope="session")
def augmented_store(augmented_root: Path, tmp_path_factory: pytest.TempPathFactory) -> FeatureStore:
    """Base records plus four augmented records per clip."""
    manifest = build_manifest("tones", augmented_root)
    return cache_features(
        manifest,
        DspConfig(),
        AugmentationPolicy(enabled=True),
        tmp_path_factory.mktemp("store-aug"),
    )


@pytest.fixture(scope="session")
def tone_plan(tone_manifest: DatasetManifest) -> FoldPlan:
    """Fold 1 held out: 80 train clips, 20 validation clips."""
    return split_folds(tone_manifest, fold_index=1)


@pytest.fixture
def short_train() -> TrainConfig:
    """A few fast epochs; enough to exercise every code path."""
    return TrainConfig(epochs=2, batch_size=16, base_lr=1e-3, seed=0)


@pytest.fixture(scope="session")
def tiny_archive(tone_store: FeatureStore, tone_plan: FoldPlan) -> WeightArchive:
    """Tiny backbone weights pretrained on the tone corpus."""
    cfg = TrainConfig(epochs=3, batch_size=16, base_lr=1e-3, seed=0)
    return pretrain_tiny_archive(tone_store, tone_plan, cfg)


@pytest.fixture
def make_tiny(
    tone_store: FeatureStore, tiny_archive: WeightArchive
) -> Callable[..., ModelHandle]:
    """Build a tiny backbone sized for the tone store."""
    _, n_mels, width = tone_store.shape

    def build(init_mode: InitMode | str = InitMode.RANDOM, seed: int = 0) -> ModelHandle:
        return build_backbone(
            Architecture.TINY,
            init_mode,
            tone_store.num_classes,
            archive=tiny_archive if InitMode(init_mode) == InitMode.PRETRAINED else None,
            seed=seed,
            input_size=(n_mels, width),
        )

    return build
