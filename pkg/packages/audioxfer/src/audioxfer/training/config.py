"""Training hyperparameters and the learning-rate schedule."""

from enum import Enum

from pydantic import Field, model_validator

from audioxfer.base import BaseSchema
from audioxfer.errors import DomainError


class Regime(str, Enum):
    """Fine-tuning (70 epochs) or training from scratch (450 epochs)."""

    PRETRAINED_70 = "pretrained"
    SCRATCH_450 = "scratch"


class WeightDecayMode(str, Enum):
    L2 = "l2"
    DECOUPLED = "decoupled"


REGIME_SCHEDULES: dict[Regime, tuple[int, tuple[int, ...]]] = {
    Regime.PRETRAINED_70: (70, (30, 60)),
    Regime.SCRATCH_450: (450, (300, 350)),
}


class TrainConfig(BaseSchema):
    """Optimizer and schedule settings.

    ``epochs`` and ``lr_drop_epochs`` default to the regime's schedule;
    regime drops at or beyond a shortened ``epochs`` are dropped.
    """

    regime: Regime = Regime.PRETRAINED_70
    base_lr: float = Field(default=1e-4, ge=0)
    weight_decay: float = Field(default=1e-3, ge=0)
    weight_decay_mode: WeightDecayMode = WeightDecayMode.L2
    batch_size: int = Field(default=32, gt=0)
    epochs: int | None = Field(default=None, gt=0)
    lr_drop_epochs: list[int] | None = None
    drop_factor: float = Field(default=10.0, gt=0)
    seed: int = 0
    include_augmented: bool = True

    @model_validator(mode="after")
    def _resolve_schedule(self) -> "TrainConfig":
        default_epochs, default_drops = REGIME_SCHEDULES[Regime(self.regime)]
        if self.epochs is None:
            self.epochs = default_epochs
        if self.lr_drop_epochs is None:
            self.lr_drop_epochs = [d for d in default_drops if d < self.epochs]
        drops = self.lr_drop_epochs
        if any(b <= a for a, b in zip(drops, drops[1:])):
            raise ValueError(f"lr_drop_epochs must be strictly increasing, got {drops}")
        if drops and (drops[0] <= 0 or drops[-1] >= self.epochs):
            raise ValueError(f"lr_drop_epochs {drops} must lie in (0, epochs={self.epochs})")
        return self

    @property
    def num_epochs(self) -> int:
        assert self.epochs is not None
        return self.epochs

    @property
    def drops(self) -> tuple[int, ...]:
        return tuple(self.lr_drop_epochs or ())


def scheduled_lr(epoch: int, cfg: TrainConfig) -> float:
    """base_lr / drop_factor ** (number of drop epochs <= epoch).

    Raises:
        DomainError: epoch outside [0, epochs)
    """
    if not 0 <= epoch < cfg.num_epochs:
        raise DomainError(f"Epoch {epoch} outside [0, {cfg.num_epochs})")
    drops = sum(1 for d in cfg.drops if d <= epoch)
    return cfg.base_lr / cfg.drop_factor**drops
