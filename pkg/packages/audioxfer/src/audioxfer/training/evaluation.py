"""Inference over cached features."""

import logging
from collections.abc import Sequence

import numpy as np
import torch
import torch.nn.functional as F

from audioxfer.datasets.loader import make_loader
from audioxfer.datasets.store import FeatureStore
from audioxfer.errors import DomainError, IntegrityError
from audioxfer.models.handle import ModelHandle
from audioxfer.training.types import Metrics

logger = logging.getLogger(__name__)

EVAL_BATCH_SIZE = 64


def base_keys(store: FeatureStore, ids: Sequence[str]) -> list[str]:
    """Base record keys for ``ids``; augmented records are dropped."""
    keys = []
    for cid in ids:
        if cid not in store:
            raise IntegrityError(f"Feature store {store.root} has no record for clip '{cid}'")
        if store.records[cid].is_augmented:
            logger.debug(f"Skipping augmented record {cid} in evaluation")
            continue
        keys.append(cid)
    return keys


@torch.no_grad()
def predict_logits(
    m: ModelHandle, store: FeatureStore, keys: Sequence[str], batch_size: int = EVAL_BATCH_SIZE
) -> tuple[np.ndarray, np.ndarray]:
    """(logits N x C as float64, labels N) in key order, network in eval mode."""
    was_training = m.net.training
    m.net.eval()
    logits, labels = [], []
    try:
        for x, y in make_loader(store, keys, batch_size=batch_size, shuffle=False):
            logits.append(m.forward(x).double().cpu().numpy())
            labels.append(y.numpy())
    finally:
        m.net.train(was_training)
    return np.concatenate(logits), np.concatenate(labels).astype(np.int64)


def evaluate_split(
    m: ModelHandle, store: FeatureStore, ids: Sequence[str], batch_size: int = EVAL_BATCH_SIZE
) -> tuple[float, Metrics]:
    """(mean cross-entropy, Metrics) over base records of ``ids``."""
    if not ids:
        raise DomainError("Cannot evaluate on an empty id list")
    keys = base_keys(store, ids)
    if not keys:
        raise DomainError("No base records among the given ids")
    logits, labels = predict_logits(m, store, keys, batch_size)
    loss = float(F.cross_entropy(torch.from_numpy(logits), torch.from_numpy(labels)))
    metrics = Metrics.from_predictions(labels, logits.argmax(axis=1), m.num_classes)
    return loss, metrics


def evaluate_model(
    m: ModelHandle, store: FeatureStore, ids: Sequence[str], batch_size: int = EVAL_BATCH_SIZE
) -> Metrics:
    """Accuracy, per-class accuracy and confusion; no parameter updates.

    Raises:
        DomainError: ``ids`` is empty
    """
    return evaluate_split(m, store, ids, batch_size)[1]
