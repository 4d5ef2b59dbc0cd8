"""
audioxfer - transfer learning from ImageNet CNNs to audio classification.

Turns audio clips into three-channel multi-resolution log-mel tensors,
fine-tunes pretrained backbones (or trains them from scratch), averages
seeded ensembles, and probes what transfers: SVCCA weight change, weight
fusion, weight freeze, model cutoff and integrated-gradients attribution.

Example:
    from audioxfer.datasets import build_manifest, cache_features, split_folds
    from audioxfer.dsp import AugmentationPolicy, DspConfig
    from audioxfer.models import WeightArchive, build_backbone
    from audioxfer.training import RunRegistry, TrainConfig, train_model

    manifest = build_manifest("esc50", "/data/ESC-50")
    store = cache_features(manifest, DspConfig(), AugmentationPolicy(), "features/esc50")
    plan = split_folds(manifest, fold_index=1)

    archive = WeightArchive.load("weights/densenet201")
    model = build_backbone("densenet", "pretrained", store.num_classes, archive=archive, seed=0)
    record = train_model(model, store, plan, TrainConfig(), RunRegistry("outputs"))
    print(record.summary())

Analyses:
    from audioxfer.analysis import weights_change_curve, run_ablation_suite, integrated_gradients

Ensembles:
    from audioxfer.ensemble import EnsembleConfig, run_ensemble, evaluate_ensemble
"""

__version__ = "0.1.0"

from audioxfer.errors import (
    AudioDecodeError,
    AudioXferError,
    ConfigurationError,
    ConfigValidationError,
    DegenerateInputError,
    DivergedRunError,
    DomainError,
    EmptyInputError,
    FeatureExtractionError,
    IngestionError,
    InitializationError,
    InsufficientMembersError,
    InsufficientSamplesError,
    IntegrityError,
    MissingArtifactError,
    NumericalError,
    RegistryLockedError,
    TooShortError,
)

__all__ = [
    "AudioDecodeError",
    "AudioXferError",
    "ConfigValidationError",
    "ConfigurationError",
    "DegenerateInputError",
    "DivergedRunError",
    "DomainError",
    "EmptyInputError",
    "FeatureExtractionError",
    "IngestionError",
    "InitializationError",
    "InsufficientMembersError",
    "InsufficientSamplesError",
    "IntegrityError",
    "MissingArtifactError",
    "NumericalError",
    "RegistryLockedError",
    "TooShortError",
    "__version__",
]
