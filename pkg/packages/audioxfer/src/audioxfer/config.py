"""Experiment configuration.

Sources, lowest to highest precedence: built-in defaults, a config file
(TOML; ``.json`` and ``.yaml`` accepted), then flag overrides given as
dotted keys (``{"train.epochs": 450}``).

The dataset root falls back to ``$AUDIOXFER_DATA_ROOT/<corpus directory>``.

Usage:
    from audioxfer.config import parse_and_validate, write_resolved

    cfg = parse_and_validate("configs/esc50_densenet_pretrained.toml", {"train.epochs": 5})
    write_resolved(cfg, "outputs/run")
"""

import json
import os
from pathlib import Path
from typing import Any

import yaml
from pydantic import Field, ValidationError, field_validator, model_validator

from audioxfer.base import BaseSchema
from audioxfer.datasets.models import DatasetKind, dataset_info
from audioxfer.dsp.augment import AugmentationPolicy
from audioxfer.dsp.config import DspConfig
from audioxfer.ensemble.config import EnsembleConfig
from audioxfer.errors import ConfigurationError, ConfigValidationError
from audioxfer.models.types import SUPPORTED_DEPTHS, Architecture, InitMode
from audioxfer.tomlio import TOMLDecodeError, loads_toml, write_toml
from audioxfer.training.config import Regime, TrainConfig

DATA_ROOT_ENV = "AUDIOXFER_DATA_ROOT"
RESOLVED_CONFIG_FILE = "config.toml"
FEATURES_DIR = "features"


class DatasetSettings(BaseSchema):
    """Which corpus, where it lives, and which fold to use for single runs."""

    kind: DatasetKind = DatasetKind.ESC50
    root: str | None = None
    store: str | None = None
    fold: int | None = Field(default=None, ge=1)
    split_seed: int = 0


class ModelSettings(BaseSchema):
    architecture: Architecture = Architecture.DENSENET
    depth: int | None = None
    init_mode: InitMode = InitMode.PRETRAINED
    archive: str | None = None

    @model_validator(mode="after")
    def _check_depth(self) -> "ModelSettings":
        supported = SUPPORTED_DEPTHS[Architecture(self.architecture)]
        if self.depth is not None and self.depth not in supported:
            raise ValueError(f"depth {self.depth} not supported for {self.architecture}; expected {supported}")
        return self


class AnalysisSettings(BaseSchema):
    """Settings for ``analyze``: SVCCA, ablation sweeps and attribution."""

    variance_keep: float = Field(default=0.99, gt=0, le=1)
    probe_points: list[str] | None = None
    cut_points: list[str] | None = None
    run: str | None = None
    compare_run: str | None = None
    ig_steps: int = Field(default=50, ge=1)
    ig_target: int | None = Field(default=None, ge=0)
    ig_clip: str | None = None
    gamma: float = Field(default=0.5, gt=0)
    iou_quantile: float = Field(default=0.9, gt=0, lt=1)


class ExperimentConfig(BaseSchema):
    """Everything one CLI invocation needs.

    ``root_seed`` seeds ``train.seed`` and ``ensemble.root_seed`` unless those
    are set explicitly. A RANDOM model without an explicit regime trains on
    the scratch schedule.
    """

    dataset: DatasetSettings = Field(default_factory=DatasetSettings)
    model: ModelSettings = Field(default_factory=ModelSettings)
    train: TrainConfig = Field(default_factory=TrainConfig)
    dsp: DspConfig = Field(default_factory=DspConfig)
    augmentation: AugmentationPolicy = Field(default_factory=AugmentationPolicy)
    ensemble: EnsembleConfig = Field(default_factory=EnsembleConfig)
    analysis: AnalysisSettings = Field(default_factory=AnalysisSettings)
    output_dir: str = "outputs"
    root_seed: int = 0
    device: str = "cpu"
    workers: int = Field(default=0, ge=0)

    @model_validator(mode="before")
    @classmethod
    def _apply_root_seed(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        data = dict(data)
        seed = data.get("root_seed", 0)
        train = dict(data.get("train") or {})
        train.setdefault("seed", seed)
        model = data.get("model") or {}
        if model.get("init_mode") == InitMode.RANDOM.value:
            train.setdefault("regime", Regime.SCRATCH_450.value)
        data["train"] = train
        ensemble = dict(data.get("ensemble") or {})
        ensemble.setdefault("root_seed", seed)
        data["ensemble"] = ensemble
        return data

    @field_validator("device")
    @classmethod
    def _check_device(cls, v: str) -> str:
        if v != "cpu" and v != "mps" and not v.startswith("cuda"):
            raise ValueError(f"device must be cpu, mps or cuda[:n], got '{v}'")
        return v

    @property
    def output_path(self) -> Path:
        return Path(self.output_dir)

    def dataset_root(self) -> Path:
        """Corpus directory: explicit root, else ``$AUDIOXFER_DATA_ROOT/<directory>``.

        Raises:
            ConfigurationError: Neither is set
        """
        if self.dataset.root:
            return Path(self.dataset.root).expanduser()
        env = os.environ.get(DATA_ROOT_ENV)
        if env:
            return Path(env).expanduser() / dataset_info(self.dataset.kind).directory
        raise ConfigurationError(
            f"No dataset root for {DatasetKind(self.dataset.kind).value}: set dataset.root "
            f"or the {DATA_ROOT_ENV} environment variable"
        )

    def store_path(self) -> Path:
        """Feature store directory (default ``<output_dir>/features/<kind>``)."""
        if self.dataset.store:
            return Path(self.dataset.store).expanduser()
        return self.output_path / FEATURES_DIR / DatasetKind(self.dataset.kind).value

    def resolved(self) -> dict[str, Any]:
        return self.model_dump(mode="json")


def _pydantic_errors(e: ValidationError) -> list[dict[str, str]]:
    return [
        {"path": ".".join(str(loc) for loc in err["loc"]) or "/", "message": err["msg"]}
        for err in e.errors()
    ]


def load_config_file(path: str | Path) -> dict[str, Any]:
    """Parse a TOML, JSON or YAML config file into a dict.

    Raises:
        ConfigValidationError: Unreadable file, parse error, or non-mapping root
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigValidationError(f"Cannot read config {path}: {e}", [{"path": "/", "message": str(e)}]) from e

    suffix = path.suffix.lower()
    try:
        if suffix == ".json":
            data = json.loads(text)
        elif suffix in (".yaml", ".yml"):
            data = yaml.safe_load(text)
        else:
            data = loads_toml(text)
    except (TOMLDecodeError, json.JSONDecodeError, yaml.YAMLError) as e:
        raise ConfigValidationError(f"Config parse error in {path}: {e}", [{"path": "/", "message": str(e)}]) from e

    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigValidationError(
            f"Invalid config {path}: expected a mapping at root", [{"path": "/", "message": "Expected object"}]
        )
    return data


def apply_overrides(data: dict[str, Any], overrides: dict[str, Any] | None) -> dict[str, Any]:
    """Set dotted keys (``"train.epochs"``) on a nested dict copy; None values are skipped."""
    merged = json.loads(json.dumps(data))
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        node = merged
        *parents, leaf = key.split(".")
        for part in parents:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigValidationError(
                    f"Cannot override '{key}': '{part}' is not a section",
                    [{"path": key, "message": "not a section"}],
                )
            node = child
        node[leaf] = value
    return merged


def validate_config(data: dict[str, Any]) -> ExperimentConfig:
    """Validate a config dict.

    Raises:
        ConfigValidationError: Unknown key, wrong type or violated invariant
    """
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        errors = _pydantic_errors(e)
        raise ConfigValidationError(f"Config validation failed with {len(errors)} error(s)", errors) from e


def parse_and_validate(
    path: str | Path | None = None, overrides: dict[str, Any] | None = None
) -> ExperimentConfig:
    """Defaults, then the file at ``path`` (if any), then ``overrides``."""
    data = load_config_file(path) if path is not None else {}
    return validate_config(apply_overrides(data, overrides))


def write_resolved(cfg: ExperimentConfig, out_dir: str | Path) -> Path:
    """Write the fully resolved config as ``<out_dir>/config.toml``."""
    return write_toml(Path(out_dir) / RESOLVED_CONFIG_FILE, cfg.resolved())
