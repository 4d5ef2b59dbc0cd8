"""Figures for the transfer-learning probes and attributions."""

from __future__ import annotations

from collections.abc import Sequence
from typing import TYPE_CHECKING

import numpy as np

from audioxfer.visualization.backend import pyplot

if TYPE_CHECKING:
    from matplotlib.axes import Axes
    from matplotlib.figure import Figure

    from audioxfer.analysis.types import AblationCurve, WeightsChangeCurve

_KIND_TITLES = {
    "fusion": "Weight fusion",
    "freeze": "Weight freeze",
    "cutoff": "Model cutoff",
}


def _kind(curve: AblationCurve) -> str:
    return str(getattr(curve.kind, "value", curve.kind))


def _new_axes(ax: Axes | None, figsize: tuple[int, int]) -> tuple[Figure, Axes]:
    if ax is None:
        fig, ax = pyplot().subplots(figsize=figsize)
        return fig, ax
    return ax.get_figure(), ax


def plot_weights_change(
    curves: Sequence[WeightsChangeCurve],
    ax: Axes | None = None,
    figsize: tuple[int, int] = (6, 4),
) -> Figure:
    """SVCCA similarity per segment, one line per curve."""
    fig, ax = _new_axes(ax, figsize)
    if not curves:
        ax.text(0.5, 0.5, "No curves", ha="center", va="center", transform=ax.transAxes)
        return fig
    for curve in curves:
        ax.plot(curve.points, curve.values, marker="o", label=curve.label or "model")
    ax.set_ylim(0.0, 1.05)
    ax.set_xlabel("Segment")
    ax.set_ylabel("SVCCA similarity")
    ax.set_title("Weights change")
    ax.grid(True, alpha=0.3)
    ax.legend(loc="lower left")
    return fig


def plot_ablation_curve(
    curves: Sequence[AblationCurve],
    ax: Axes | None = None,
    figsize: tuple[int, int] = (6, 4),
) -> Figure:
    """Validation accuracy per cut point, one line per curve."""
    fig, ax = _new_axes(ax, figsize)
    if not curves:
        ax.text(0.5, 0.5, "No curves", ha="center", va="center", transform=ax.transAxes)
        return fig
    for curve in curves:
        label = curve.label or _KIND_TITLES.get(_kind(curve), _kind(curve))
        if curve.partial:
            label += " (partial)"
        ax.plot(curve.x, np.asarray(curve.y) * 100, marker="o", label=label)
    ax.set_xlabel("Cut point")
    ax.set_ylabel("Validation accuracy (%)")
    kinds = sorted({_kind(c) for c in curves})
    ax.set_title(" / ".join(_KIND_TITLES.get(k, k) for k in kinds))
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best")
    return fig


def plot_transfer_curves(
    weights_change: Sequence[WeightsChangeCurve] = (),
    ablations: Sequence[AblationCurve] = (),
    figsize: tuple[int, int] = (15, 4),
) -> Figure:
    """Side-by-side panels: weights change, fusion/freeze, cutoff.

    Panels with no data are left out.
    """
    plt = pyplot()
    transplant = [c for c in ablations if _kind(c) in ("fusion", "freeze")]
    cutoff = [c for c in ablations if _kind(c) == "cutoff"]
    panels = [p for p in (weights_change, transplant, cutoff) if p]
    fig, axes = plt.subplots(1, max(len(panels), 1), figsize=figsize, squeeze=False)
    axes = axes[0]
    if not panels:
        axes[0].text(0.5, 0.5, "No curves", ha="center", va="center", transform=axes[0].transAxes)
        return fig

    i = 0
    if weights_change:
        plot_weights_change(weights_change, ax=axes[i])
        i += 1
    if transplant:
        plot_ablation_curve(transplant, ax=axes[i])
        i += 1
    if cutoff:
        plot_ablation_curve(cutoff, ax=axes[i])
    fig.tight_layout()
    return fig


def gamma_scale(values: np.ndarray, gamma: float = 0.5) -> np.ndarray:
    """|values| summed over channels, scaled to [0, 1] then raised to ``gamma``."""
    heat = np.abs(values).sum(axis=0) if values.ndim == 3 else np.abs(values)
    peak = float(heat.max(initial=0.0))
    if peak <= 0:
        return np.zeros_like(heat, dtype=np.float64)
    return (heat / peak) ** gamma


def plot_attribution(
    x: np.ndarray,
    attribution: np.ndarray,
    gamma: float = 0.5,
    figsize: tuple[int, int] = (12, 4),
) -> Figure:
    """Two panels, no colorbars: channel-0 log-mel and the attribution heat map."""
    plt = pyplot()
    fig, (ax_mel, ax_heat) = plt.subplots(1, 2, figsize=figsize)
    ax_mel.imshow(x[0], origin="lower", aspect="auto", cmap="magma")
    ax_mel.set_title("Log-mel (channel 0)")
    ax_heat.imshow(
        gamma_scale(attribution, gamma), origin="lower", aspect="auto", cmap="inferno", vmin=0.0, vmax=1.0
    )
    ax_heat.set_title(f"|Integrated gradients| (gamma={gamma})")
    for ax in (ax_mel, ax_heat):
        ax.set_xlabel("Frame")
        ax.set_ylabel("Mel bin")
    fig.tight_layout()
    return fig
