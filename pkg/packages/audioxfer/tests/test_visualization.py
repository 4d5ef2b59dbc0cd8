"""Tests for the plotting backend and training figures."""

import sys

import numpy as np
import pytest

from audioxfer.training.types import EpochMetrics, Metrics, RunRecord
from audioxfer.visualization import plot_confusion, plot_learning_curves, save_figure
from audioxfer.visualization.backend import VIZ_EXTRA_HINT, pyplot, seaborn


def run_with_epochs(n: int) -> RunRecord:
    epochs = [
        EpochMetrics(epoch=i, lr=1e-3, train_loss=1.0 / (i + 1), train_accuracy=0.5 + i / 20,
                     val_loss=1.2 / (i + 1), val_accuracy=0.5 + i / 25)
        for i in range(n)
    ]
    return RunRecord(
        run_id="r0", dataset="tones", architecture="tiny", init_mode="random",
        topology={}, train_config={}, epochs=epochs,
    )


class TestBackend:
    """Lazy imports of the optional plotting stack."""

    def test_pyplot(self):
        pytest.importorskip("matplotlib")
        plt = pyplot()
        assert hasattr(plt, "subplots")

    def test_missing_matplotlib_names_extra(self, monkeypatch):
        monkeypatch.setitem(sys.modules, "matplotlib", None)
        with pytest.raises(ImportError, match="matplotlib") as exc:
            pyplot()
        assert VIZ_EXTRA_HINT in str(exc.value)

    def test_missing_seaborn_names_extra(self, monkeypatch):
        monkeypatch.setitem(sys.modules, "seaborn", None)
        with pytest.raises(ImportError, match="seaborn") as exc:
            seaborn()
        assert "audioxfer[viz]" in str(exc.value)


class TestTrainingFigures:
    """Learning curves and confusion heatmaps."""

    def test_learning_curves(self, tmp_path):
        pytest.importorskip("matplotlib")
        fig = plot_learning_curves(run_with_epochs(5))
        assert len(fig.axes) == 2
        assert len(fig.axes[0].lines) == 2
        path = save_figure(fig, tmp_path / "curves" / "learning.png")
        assert path.exists()

    def test_learning_curves_without_epochs(self):
        pytest.importorskip("matplotlib")
        fig = plot_learning_curves(run_with_epochs(0))
        assert fig.axes[0].texts[0].get_text() == "No epochs"

    def test_confusion(self):
        pytest.importorskip("matplotlib")
        pytest.importorskip("seaborn")
        metrics = Metrics.from_predictions(np.array([0, 0, 1, 1]), np.array([0, 1, 1, 1]), 2)
        fig = plot_confusion(metrics, class_names=["pulsed", "steady"])
        assert fig.axes[0].get_title() == "Accuracy 75.00%"
