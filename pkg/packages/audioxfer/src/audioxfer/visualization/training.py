"""Learning-curve and confusion-matrix figures."""

from __future__ import annotations

from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np

from audioxfer.visualization.backend import pyplot, seaborn

if TYPE_CHECKING:
    from matplotlib.axes import Axes
    from matplotlib.figure import Figure

    from audioxfer.training.types import Metrics, RunRecord


def save_figure(fig: Figure, path: str | Path, dpi: int = 120) -> Path:
    """Write a figure as PNG and close it."""
    plt = pyplot()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=dpi, bbox_inches="tight", format="png")
    plt.close(fig)
    return path


def plot_learning_curves(
    record: RunRecord,
    figsize: tuple[int, int] = (12, 4),
) -> Figure:
    """Loss and accuracy per epoch, train vs validation.

    Args:
        record: Run with per-epoch metrics
        figsize: Figure size

    Returns:
        Matplotlib Figure with two panels
    """
    plt = pyplot()
    fig, (ax_loss, ax_acc) = plt.subplots(1, 2, figsize=figsize)
    df = record.to_dataframe()
    if df.empty:
        for ax in (ax_loss, ax_acc):
            ax.text(0.5, 0.5, "No epochs", ha="center", va="center", transform=ax.transAxes)
        return fig

    epochs = df["epoch"] + 1
    ax_loss.plot(epochs, df["train_loss"], label="train", color="#1f77b4")
    ax_loss.plot(epochs, df["val_loss"], label="validation", color="#ff7f0e")
    ax_loss.set_ylabel("Cross-entropy")

    ax_acc.plot(epochs, df["train_accuracy"] * 100, label="train", color="#1f77b4")
    ax_acc.plot(epochs, df["val_accuracy"] * 100, label="validation", color="#ff7f0e")
    ax_acc.set_ylabel("Accuracy (%)")

    for ax in (ax_loss, ax_acc):
        ax.set_xlabel("Epoch")
        ax.grid(True, alpha=0.3)
        ax.legend(loc="best")
    fig.suptitle(f"{record.architecture} / {record.init_mode} on {record.dataset}")
    fig.tight_layout()
    return fig


def plot_confusion(
    metrics: Metrics,
    class_names: list[str] | None = None,
    ax: Axes | None = None,
    figsize: tuple[int, int] = (8, 7),
    normalize: bool = True,
    cmap: str = "Blues",
) -> Figure:
    """Confusion matrix heatmap, rows = true class.

    Args:
        metrics: Evaluation metrics
        class_names: Tick labels (default: class indices)
        ax: Optional matplotlib axes
        figsize: Figure size
        normalize: Show row-normalized rates instead of counts
        cmap: Colormap

    Returns:
        Matplotlib Figure object
    """
    plt = pyplot()
    sns = seaborn()

    if ax is None:
        fig, ax = plt.subplots(figsize=figsize)
    else:
        fig = ax.get_figure()

    data = metrics.confusion.astype(np.float64)
    if normalize:
        support = data.sum(axis=1, keepdims=True)
        data = np.divide(data, support, out=np.zeros_like(data), where=support > 0)

    n = data.shape[0]
    labels = class_names if class_names is not None else [str(i) for i in range(n)]
    sns.heatmap(
        data,
        ax=ax,
        cmap=cmap,
        vmin=0.0,
        vmax=1.0 if normalize else None,
        square=True,
        annot=n <= 12,
        fmt=".2f" if normalize else ".0f",
        xticklabels=labels,
        yticklabels=labels,
        cbar=True,
    )
    ax.set_xlabel("Predicted")
    ax.set_ylabel("True")
    ax.set_title(f"Accuracy {metrics.accuracy:.2%}")
    return fig
