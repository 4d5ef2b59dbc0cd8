"""Ensemble settings."""

from pydantic import Field, model_validator

from audioxfer.base import BaseSchema


class EnsembleConfig(BaseSchema):
    """M identically configured members differing only in seed.

    Without explicit ``seeds`` member i gets ``root_seed + i``, so one
    integer reproduces the whole ensemble.
    """

    members: int = Field(default=5, ge=2)
    root_seed: int = 0
    seeds: list[int] | None = None

    @model_validator(mode="after")
    def _resolve_seeds(self) -> "EnsembleConfig":
        if self.seeds is None:
            self.seeds = [self.root_seed + i for i in range(self.members)]
        if len(self.seeds) != self.members:
            raise ValueError(f"Expected {self.members} seeds, got {len(self.seeds)}")
        if len(set(self.seeds)) != len(self.seeds):
            raise ValueError(f"Member seeds must be pairwise distinct, got {self.seeds}")
        return self

    @property
    def member_seeds(self) -> tuple[int, ...]:
        assert self.seeds is not None
        return tuple(self.seeds)
