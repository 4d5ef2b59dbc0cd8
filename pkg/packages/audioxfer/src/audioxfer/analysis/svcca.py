"""Singular vector canonical correlation analysis.

Each side is centered and truncated to the singular directions that hold
``variance_keep`` of its squared singular-value mass; the canonical
correlations between the two truncated subspaces are the singular values
of Qa^T Qb for orthonormal bases Qa, Qb.
"""

import logging
from collections.abc import Sequence

import numpy as np
from scipy import linalg

from audioxfer.analysis.activations import capture_activations
from audioxfer.analysis.types import ActivationMatrix, CcaReport, WeightsChangeCurve
from audioxfer.datasets.store import FeatureStore
from audioxfer.errors import DegenerateInputError, DomainError, InsufficientSamplesError
from audioxfer.models.handle import ModelHandle
from audioxfer.models.types import Architecture

logger = logging.getLogger(__name__)

DEFAULT_VARIANCE_KEEP = 0.99


def svd_reduce(values: np.ndarray, variance_keep: float, name: str = "") -> np.ndarray:
    """Centered data projected onto its top singular directions.

    Raises:
        DegenerateInputError: The centered data has rank 0
    """
    centered = values - values.mean(axis=0, keepdims=True)
    u, s, _ = linalg.svd(centered, full_matrices=False, lapack_driver="gesvd")
    tol = s.max(initial=0.0) * max(centered.shape) * np.finfo(np.float64).eps
    s = s[s > tol]
    if s.size == 0:
        raise DegenerateInputError(f"Activations {name} have no variance")
    energy = np.cumsum(s**2) / np.sum(s**2)
    rank = int(np.searchsorted(energy, variance_keep - 1e-12) + 1)
    rank = min(rank, s.size)
    return u[:, :rank] * s[:rank]


def canonical_correlations(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Canonical correlations of two full-column-rank centered matrices, descending."""
    qa, _ = linalg.qr(a, mode="economic")
    qb, _ = linalg.qr(b, mode="economic")
    rho = linalg.svd(qa.T @ qb, compute_uv=False)
    return np.clip(np.sort(rho)[::-1], 0.0, 1.0)


def svcca_similarity(
    a: ActivationMatrix, b: ActivationMatrix, variance_keep: float = DEFAULT_VARIANCE_KEEP
) -> CcaReport:
    """SVCCA between two row-aligned activation matrices.

    Raises:
        DomainError: Row counts differ or variance_keep outside (0, 1]
        InsufficientSamplesError: N - 1 <= the larger retained rank
        DegenerateInputError: One side has no variance
    """
    if a.n != b.n:
        raise DomainError(f"Activation matrices are not row-aligned: {a.n} vs {b.n} rows")
    if not 0.0 < variance_keep <= 1.0:
        raise DomainError(f"variance_keep must lie in (0, 1], got {variance_keep}")

    ra = svd_reduce(a.values, variance_keep, a.probe_point)
    rb = svd_reduce(b.values, variance_keep, b.probe_point)
    rank = max(ra.shape[1], rb.shape[1])
    # Centering leaves N - 1 degrees of freedom.
    if a.n - 1 <= rank:
        raise InsufficientSamplesError(
            f"SVCCA at {a.probe_point} needs more than {rank + 1} examples, got {a.n}"
        )

    rho = canonical_correlations(ra, rb)
    return CcaReport(
        probe_point=a.probe_point,
        rank_a=int(ra.shape[1]),
        rank_b=int(rb.shape[1]),
        correlations=rho,
        mean=float(rho.mean()),
    )


def weights_change_curve(
    before: ModelHandle,
    after: ModelHandle,
    store: FeatureStore,
    ids: Sequence[str],
    variance_keep: float = DEFAULT_VARIANCE_KEEP,
    probe_points: Sequence[str] | None = None,
    label: str = "",
) -> WeightsChangeCurve:
    """SVCCA similarity of ``before`` and ``after`` at every segment output.

    Raises:
        DomainError: Models differ in architecture or segment layout
    """
    if Architecture(before.architecture) != Architecture(after.architecture) or (
        before.net.segment_names != after.net.segment_names
    ):
        raise DomainError(
            f"Cannot compare {before.topology.name} {before.net.segment_names} with "
            f"{after.topology.name} {after.net.segment_names}"
        )
    points = list(probe_points or before.net.segment_names)
    acts_before = capture_activations(before, points, store, ids)
    acts_after = capture_activations(after, points, store, ids)

    reports = [
        svcca_similarity(a, b, variance_keep) for a, b in zip(acts_before, acts_after)
    ]
    for r in reports:
        logger.info(f"SVCCA {label or 'curve'} {r.probe_point}: {r.mean:.4f} (ranks {r.rank_a}/{r.rank_b})")
    return WeightsChangeCurve(label=label, reports=reports)
