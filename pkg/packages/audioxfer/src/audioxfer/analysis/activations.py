"""Capture pooled segment outputs with forward hooks."""

import logging
from collections.abc import Sequence

import numpy as np
import torch

from audioxfer.analysis.types import ActivationMatrix
from audioxfer.datasets.loader import make_loader
from audioxfer.datasets.store import FeatureStore
from audioxfer.errors import DomainError
from audioxfer.models.handle import ModelHandle
from audioxfer.training.evaluation import EVAL_BATCH_SIZE, base_keys

logger = logging.getLogger(__name__)


def _pool(output: torch.Tensor) -> torch.Tensor:
    """Channel-wise spatial mean; 2-D outputs (logits) pass through."""
    if output.ndim == 4:
        return output.mean(dim=(2, 3))
    return output.reshape(output.shape[0], -1)


@torch.no_grad()
def capture_activations(
    m: ModelHandle,
    probe_points: Sequence[str],
    store: FeatureStore,
    ids: Sequence[str],
    batch_size: int = EVAL_BATCH_SIZE,
) -> list[ActivationMatrix]:
    """Spatially pooled outputs of each probe segment, rows in ``ids`` order.

    Args:
        m: Model to probe (run in eval mode)
        probe_points: Segment names, any of the model's segments
        store: Feature store
        ids: Clip ids; augmented records are ignored

    Raises:
        DomainError: Unknown probe point or empty ids
    """
    unknown = [p for p in probe_points if p not in m.net.segment_names]
    if unknown:
        raise DomainError(f"Unknown probe point(s) {unknown}; model has {m.net.segment_names}")
    if not ids:
        raise DomainError("capture_activations needs at least one id")

    captured: dict[str, list[np.ndarray]] = {p: [] for p in probe_points}
    handles = []
    for point in probe_points:
        def hook(_module: torch.nn.Module, _inp: object, out: torch.Tensor, point: str = point) -> None:
            captured[point].append(_pool(out).double().cpu().numpy())

        handles.append(m.net.segment(point).register_forward_hook(hook))

    was_training = m.net.training
    m.net.eval()
    try:
        for x, _ in make_loader(store, base_keys(store, ids), batch_size=batch_size):
            m.forward(x)
    finally:
        for h in handles:
            h.remove()
        m.net.train(was_training)

    source = f"{m.topology.name}/{m.init_mode}/seed{m.seed}"
    return [
        ActivationMatrix(values=np.concatenate(captured[p]), probe_point=p, source=source)
        for p in probe_points
    ]
