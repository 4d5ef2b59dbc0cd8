"""Figures: learning curves, confusion heatmaps, transfer curves, attributions.

Requires matplotlib (and seaborn for heatmaps):
    pip install 'audioxfer[viz]'
"""

from audioxfer.visualization.analysis import (
    gamma_scale,
    plot_ablation_curve,
    plot_attribution,
    plot_transfer_curves,
    plot_weights_change,
)
from audioxfer.visualization.training import plot_confusion, plot_learning_curves, save_figure

__all__ = [
    "gamma_scale",
    "plot_ablation_curve",
    "plot_attribution",
    "plot_confusion",
    "plot_learning_curves",
    "plot_transfer_curves",
    "plot_weights_change",
    "save_figure",
]
