"""Analysis result types."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np
import pandas as pd

from audioxfer.errors import DomainError


class AblationKind(str, Enum):
    """Transfer-learning probes that rebuild and retrain the model per cut point."""

    FUSION = "fusion"
    FREEZE = "freeze"
    CUTOFF = "cutoff"


@dataclass
class ActivationMatrix:
    """Pooled activations: N examples x D channels at one probe point."""

    values: np.ndarray
    probe_point: str
    source: str = ""

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise DomainError(f"ActivationMatrix must be 2-D, got shape {self.values.shape}")
        if not np.all(np.isfinite(self.values)):
            raise DomainError(f"Activations at {self.probe_point} contain non-finite values")

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    @property
    def d(self) -> int:
        return int(self.values.shape[1])


@dataclass
class CcaReport:
    """SVCCA comparison at one probe point.

    Attributes:
        probe_point: Segment whose outputs were compared
        rank_a: Singular directions kept for the first side
        rank_b: Singular directions kept for the second side
        correlations: Canonical correlations, descending, each in [0, 1]
        mean: Mean canonical correlation (the similarity score)
    """

    probe_point: str
    rank_a: int
    rank_b: int
    correlations: np.ndarray
    mean: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "probe_point": self.probe_point,
            "rank_a": self.rank_a,
            "rank_b": self.rank_b,
            "correlations": [float(c) for c in self.correlations],
            "mean": self.mean,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> CcaReport:
        return cls(
            probe_point=d["probe_point"],
            rank_a=int(d["rank_a"]),
            rank_b=int(d["rank_b"]),
            correlations=np.asarray(d["correlations"], dtype=np.float64),
            mean=float(d["mean"]),
        )


@dataclass
class WeightsChangeCurve:
    """Mean SVCCA similarity per probe point, in forward order."""

    label: str
    reports: list[CcaReport]

    @property
    def points(self) -> list[str]:
        return [r.probe_point for r in self.reports]

    @property
    def values(self) -> list[float]:
        return [r.mean for r in self.reports]

    def to_dataframe(self) -> pd.DataFrame:
        return pd.DataFrame(
            {"label": self.label, "probe_point": self.points, "svcca_mean": self.values}
        )

    def to_dict(self) -> dict[str, Any]:
        return {"label": self.label, "reports": [r.to_dict() for r in self.reports]}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> WeightsChangeCurve:
        return cls(label=d.get("label", ""), reports=[CcaReport.from_dict(r) for r in d["reports"]])


@dataclass
class AttributionMap:
    """Integrated-gradients attribution for one input.

    Attributes:
        values: Same shape as the input tensor
        baseline: Baseline the path started from
        steps: Riemann steps
        target: Class index attributed
        residual: |sum(values) - (F(x) - F(baseline))|
        output_delta: F(x) - F(baseline)
    """

    values: np.ndarray
    baseline: np.ndarray
    steps: int
    target: int
    residual: float
    output_delta: float

    @property
    def relative_residual(self) -> float:
        return self.residual / (abs(self.output_delta) + 1e-12)

    def to_dict(self) -> dict[str, Any]:
        return {
            "shape": list(self.values.shape),
            "steps": self.steps,
            "target": self.target,
            "residual": self.residual,
            "output_delta": self.output_delta,
            "attribution_sum": float(self.values.sum()),
        }


@dataclass
class AblationCurve:
    """Validation accuracy per cut point of one ablation.

    ``partial`` is set when a point diverged; such points carry NaN accuracy.
    """

    kind: AblationKind
    x: list[str]
    y: list[float]
    run_ids: list[str]
    partial: bool = False
    label: str = ""
    extra: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not len(self.x) == len(self.y) == len(self.run_ids):
            raise DomainError("AblationCurve x, y and run_ids must have equal length")

    def to_dataframe(self) -> pd.DataFrame:
        return pd.DataFrame({"cut_point": self.x, "val_accuracy": self.y, "run_id": self.run_ids})
