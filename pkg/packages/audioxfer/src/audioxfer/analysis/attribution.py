"""Integrated-gradients attribution (right Riemann sum along the straight path)."""

from __future__ import annotations

import copy
import logging
from collections.abc import Callable
from pathlib import Path

import numpy as np
import torch

from audioxfer.analysis.types import AttributionMap
from audioxfer.dsp.types import MelTensor
from audioxfer.errors import DomainError, NumericalError
from audioxfer.models.handle import ModelHandle

logger = logging.getLogger(__name__)

DEFAULT_STEPS = 50
Scorer = Callable[[torch.Tensor], torch.Tensor]
ArrayLike = MelTensor | np.ndarray | torch.Tensor


def _as_array(t: ArrayLike) -> np.ndarray:
    if isinstance(t, MelTensor):
        return t.values
    if isinstance(t, torch.Tensor):
        return t.detach().cpu().numpy()
    return np.asarray(t)


def channel_minimum_baseline(x: ArrayLike) -> MelTensor:
    """Every cell set to its channel's minimum ("silence" in normalized log-mel)."""
    values = _as_array(x)
    mins = values.reshape(values.shape[0], -1).min(axis=1)
    return MelTensor(values=np.broadcast_to(mins[:, None, None], values.shape).copy())


def integrate_gradients(
    scorer: Scorer,
    x: ArrayLike,
    baseline: ArrayLike,
    steps: int = DEFAULT_STEPS,
    target: int = 0,
    batch_size: int = 16,
    dtype: torch.dtype = torch.float64,
) -> AttributionMap:
    """Integrated gradients for any batched scorer returning (N, C) outputs.

    IG_i = (x_i - x'_i) / steps * sum_{k=1..steps} dF/dx_i at x' + (k/steps)(x - x')

    Raises:
        DomainError: Shapes differ or steps < 1
        NumericalError: Non-finite gradient (carries the step index)
    """
    xv, bv = _as_array(x), _as_array(baseline)
    if xv.shape != bv.shape:
        raise DomainError(f"Input shape {xv.shape} differs from baseline shape {bv.shape}")
    if steps < 1:
        raise DomainError(f"steps must be >= 1, got {steps}")

    xt = torch.as_tensor(xv, dtype=dtype)
    bt = torch.as_tensor(bv, dtype=dtype)
    delta = xt - bt
    total = torch.zeros_like(xt)

    for start in range(1, steps + 1, batch_size):
        ks = torch.arange(start, min(start + batch_size, steps + 1), dtype=dtype)
        alphas = (ks / steps).reshape(-1, *([1] * xt.ndim))
        points = (bt + alphas * delta).requires_grad_(True)
        out = scorer(points)[:, target]
        (grads,) = torch.autograd.grad(out.sum(), points)
        finite = torch.isfinite(grads.reshape(grads.shape[0], -1)).all(dim=1)
        if not bool(finite.all()):
            bad = int(ks[~finite][0])
            raise NumericalError(f"Non-finite gradient at integration step {bad}", step=bad)
        total += grads.sum(dim=0)

    attributions = (delta * total / steps).numpy()
    with torch.no_grad():
        ends = scorer(torch.stack([xt, bt]))[:, target]
    output_delta = float(ends[0] - ends[1])
    residual = abs(float(attributions.sum()) - output_delta)
    return AttributionMap(
        values=attributions,
        baseline=bv.copy(),
        steps=steps,
        target=target,
        residual=residual,
        output_delta=output_delta,
    )


def integrated_gradients(
    m: ModelHandle,
    x: ArrayLike,
    baseline: ArrayLike | None = None,
    steps: int = DEFAULT_STEPS,
    target: int | None = None,
    batch_size: int = 16,
) -> AttributionMap:
    """Attribute a model's ``target`` logit to every input cell.

    The network runs in eval mode in float64 on a private copy.

    Args:
        m: Model
        x: Input tensor (3, n_mels, W)
        baseline: Path start (default: channel-minimum baseline)
        steps: Riemann steps
        target: Class index (default: the predicted class)
    """
    net = copy.deepcopy(m.net).cpu().double().eval()
    for p in net.parameters():
        p.requires_grad_(False)

    if baseline is None:
        baseline = channel_minimum_baseline(x)
    if target is None:
        with torch.no_grad():
            logits = net(torch.as_tensor(_as_array(x), dtype=torch.float64)[None])
        target = int(logits.argmax(dim=1))

    result = integrate_gradients(net, x, baseline, steps=steps, target=target, batch_size=batch_size)
    logger.debug(
        f"IG target={target} steps={steps} delta={result.output_delta:.6f} "
        f"residual={result.residual:.3e}"
    )
    return result


def attribution_energy_iou(x: ArrayLike, a: AttributionMap | np.ndarray, quantile: float = 0.9) -> float:
    """IoU of the top-quantile attribution cells and the top-quantile energy cells.

    Both maps are collapsed over channels (energy by mean, attribution by
    summed magnitude). Zero-attribution cells never count as attributed.
    """
    if not 0.0 < quantile < 1.0:
        raise DomainError(f"quantile must lie in (0, 1), got {quantile}")
    energy = _as_array(x).mean(axis=0)
    values = a.values if isinstance(a, AttributionMap) else np.asarray(a)
    heat = np.abs(values).sum(axis=0)
    if energy.shape != heat.shape:
        raise DomainError(f"Input shape {energy.shape} differs from attribution shape {heat.shape}")

    energy_mask = energy >= np.quantile(energy, quantile)
    heat_mask = (heat >= np.quantile(heat, quantile)) & (heat > 0)
    union = np.logical_or(energy_mask, heat_mask).sum()
    if union == 0:
        return 0.0
    return float(np.logical_and(energy_mask, heat_mask).sum() / union)


def render_attribution(
    x: ArrayLike, a: AttributionMap, out_path: str | Path, gamma: float = 0.5
) -> Path:
    """Write a two-panel PNG: channel-0 log-mel and gamma-scaled |attribution|.

    Raises:
        DomainError: Shapes differ
        OSError: Path not writable
    """
    from audioxfer.visualization.analysis import plot_attribution
    from audioxfer.visualization.training import save_figure

    if _as_array(x).shape != a.values.shape:
        raise DomainError(f"Input shape {_as_array(x).shape} differs from attribution {a.values.shape}")
    fig = plot_attribution(_as_array(x), a.values, gamma=gamma)
    return save_figure(fig, out_path)
