"""Softmax averaging over ensemble members."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
import torch
from scipy.special import softmax

from audioxfer.datasets.store import FeatureStore
from audioxfer.errors import DomainError
from audioxfer.models.handle import ModelHandle
from audioxfer.training.evaluation import EVAL_BATCH_SIZE, base_keys, predict_logits
from audioxfer.training.types import Metrics

logger = logging.getLogger(__name__)


@dataclass
class EnsemblePrediction:
    """Per-member and averaged class probabilities.

    Attributes:
        member_probs: (M, N, C) softmax of each member's logits
        mean_probs: (N, C) uniform mean over members
        labels: (N,) argmax of ``mean_probs``
    """

    member_probs: np.ndarray
    mean_probs: np.ndarray
    labels: np.ndarray

    @property
    def num_members(self) -> int:
        return int(self.member_probs.shape[0])

    def member_labels(self) -> np.ndarray:
        """(M, N) each member's own prediction."""
        return self.member_probs.argmax(axis=2)


def average_softmax(member_logits: Sequence[np.ndarray]) -> EnsemblePrediction:
    """Softmax each member's (N, C) logits, then average.

    Raises:
        DomainError: No members, or members disagree on shape
    """
    if not member_logits:
        raise DomainError("An ensemble needs at least one member")
    shapes = {np.shape(z) for z in member_logits}
    if len(shapes) != 1:
        raise DomainError(f"Member outputs differ in shape: {sorted(shapes)}")
    probs = softmax(np.stack([np.asarray(z, dtype=np.float64) for z in member_logits]), axis=-1)
    mean = probs.mean(axis=0)
    return EnsemblePrediction(member_probs=probs, mean_probs=mean, labels=mean.argmax(axis=1))


def _check_classes(models: Sequence[ModelHandle]) -> None:
    if not models:
        raise DomainError("An ensemble needs at least one member")
    counts = {m.num_classes for m in models}
    if len(counts) != 1:
        raise DomainError(f"Members disagree on the number of classes: {sorted(counts)}")


@torch.no_grad()
def ensemble_predict(
    models: Sequence[ModelHandle], inputs: torch.Tensor | np.ndarray
) -> EnsemblePrediction:
    """Average the members' softmax outputs on a batch of (N, 3, n_mels, W) inputs.

    Raises:
        DomainError: Empty list or class-count mismatch
    """
    _check_classes(models)
    x = torch.as_tensor(inputs, dtype=torch.float32)
    logits = []
    for m in models:
        was_training = m.net.training
        m.net.eval()
        try:
            logits.append(m.forward(x.to(m.device)).double().cpu().numpy())
        finally:
            m.net.train(was_training)
    return average_softmax(logits)


def ensemble_predict_store(
    models: Sequence[ModelHandle],
    store: FeatureStore,
    ids: Sequence[str],
    batch_size: int = EVAL_BATCH_SIZE,
) -> tuple[EnsemblePrediction, np.ndarray]:
    """(prediction, true labels) over the base records of ``ids``."""
    _check_classes(models)
    if not ids:
        raise DomainError("Cannot evaluate on an empty id list")
    keys = base_keys(store, ids)
    logits, labels = [], None
    for m in models:
        z, labels = predict_logits(m, store, keys, batch_size)
        logits.append(z)
    assert labels is not None
    return average_softmax(logits), labels


def ensemble_evaluate(
    models: Sequence[ModelHandle],
    store: FeatureStore,
    ids: Sequence[str],
    batch_size: int = EVAL_BATCH_SIZE,
) -> Metrics:
    """Metrics of the averaged-softmax argmax.

    A single-member list gives exactly that member's evaluation.
    """
    prediction, labels = ensemble_predict_store(models, store, ids, batch_size)
    metrics = Metrics.from_predictions(labels, prediction.labels, models[0].num_classes)
    logger.info(f"Ensemble of {len(models)}: accuracy {metrics.accuracy:.4f}")
    return metrics
