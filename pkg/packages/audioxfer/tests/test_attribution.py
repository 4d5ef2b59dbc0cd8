"""Tests for integrated-gradients attribution."""

import numpy as np
import pytest
import torch

from audioxfer.analysis import (
    AttributionMap,
    attribution_energy_iou,
    channel_minimum_baseline,
    integrate_gradients,
    integrated_gradients,
    render_attribution,
)
from audioxfer.errors import DomainError
from audioxfer.models import InitMode

SHAPE = (3, 20, 10)


def linear_scorer(w: torch.Tensor, scale: float = 1.0):
    """Two-class scorer whose class-0 output is <w, x>."""

    def score(points: torch.Tensor) -> torch.Tensor:
        s = (points * w).flatten(1).sum(dim=1) * scale
        return torch.stack([s, -s], dim=1)

    return score


def smooth_scorer(w: torch.Tensor):
    def score(points: torch.Tensor) -> torch.Tensor:
        s = torch.tanh(points * w).flatten(1).sum(dim=1) ** 2
        return torch.stack([s, torch.zeros_like(s)], dim=1)

    return score


def burst() -> np.ndarray:
    """Silent spectrogram with one bright 4x5 patch in every channel."""
    x = np.zeros(SHAPE)
    x[:, 8:12, 3:8] = 1.0
    return x


class TestIntegrateGradients:
    """Exact properties on closed-form scorers."""

    def test_linear_scorer_is_exact(self):
        rng = np.random.default_rng(0)
        w = torch.as_tensor(rng.normal(size=SHAPE))
        x = rng.normal(size=SHAPE)
        a = integrate_gradients(linear_scorer(w), x, np.zeros(SHAPE), steps=7)
        np.testing.assert_allclose(a.values, w.numpy() * x, atol=1e-10)
        assert a.residual < 1e-9

    def test_input_equal_to_baseline(self):
        w = torch.ones(SHAPE, dtype=torch.float64)
        x = np.random.default_rng(1).normal(size=SHAPE)
        a = integrate_gradients(smooth_scorer(w), x, x.copy(), steps=10)
        assert not a.values.any()
        assert a.residual == 0.0
        assert a.output_delta == 0.0

    def test_scaling_output_scales_attribution(self):
        rng = np.random.default_rng(2)
        w = torch.as_tensor(rng.normal(size=SHAPE))
        x = rng.normal(size=SHAPE)
        one = integrate_gradients(linear_scorer(w), x, np.zeros(SHAPE), steps=5)
        three = integrate_gradients(linear_scorer(w, scale=3.0), x, np.zeros(SHAPE), steps=5)
        np.testing.assert_allclose(three.values, 3.0 * one.values, atol=1e-9)

    def test_residual_shrinks_with_steps(self):
        rng = np.random.default_rng(3)
        w = torch.as_tensor(rng.normal(size=SHAPE) * 0.3)
        x = rng.normal(size=SHAPE)
        residuals = [
            integrate_gradients(smooth_scorer(w), x, np.zeros(SHAPE), steps=k).residual
            for k in (8, 16, 32, 64)
        ]
        assert all(b < a for a, b in zip(residuals, residuals[1:]))

    def test_target_selects_output(self):
        w = torch.ones(SHAPE, dtype=torch.float64)
        x = np.full(SHAPE, 0.5)
        pos = integrate_gradients(linear_scorer(w), x, np.zeros(SHAPE), target=0)
        neg = integrate_gradients(linear_scorer(w), x, np.zeros(SHAPE), target=1)
        np.testing.assert_allclose(pos.values, -neg.values)

    def test_shape_mismatch(self):
        w = torch.ones(SHAPE, dtype=torch.float64)
        with pytest.raises(DomainError, match="baseline"):
            integrate_gradients(linear_scorer(w), np.zeros(SHAPE), np.zeros((3, 20, 9)))

    def test_steps_positive(self):
        w = torch.ones(SHAPE, dtype=torch.float64)
        with pytest.raises(DomainError):
            integrate_gradients(linear_scorer(w), np.zeros(SHAPE), np.zeros(SHAPE), steps=0)


class TestIntegratedGradientsOnModels:
    """Completeness on a real backbone."""

    def test_completeness(self, make_tiny, tone_store, tone_plan):
        m = make_tiny(InitMode.PRETRAINED)
        x = tone_store.read_tensor(tone_plan.val_ids[0])
        a = integrated_gradients(m, x, steps=200)
        assert a.values.shape == x.shape
        assert a.residual <= 0.01 * abs(a.output_delta) + 1e-6

    def test_residual_shrinks_as_steps_double(self, make_tiny, tone_store, tone_plan):
        m = make_tiny(InitMode.PRETRAINED)
        x = tone_store.read_tensor(tone_plan.val_ids[0])
        maps = [integrated_gradients(m, x, steps=n) for n in (25, 50, 100, 200)]
        delta = abs(maps[0].output_delta)
        residuals = [a.residual for a in maps]
        # ReLU kinks allow tiny wobbles between neighbouring step counts.
        slack = 1e-3 * delta + 1e-9
        for coarse, fine in zip(residuals, residuals[1:]):
            assert fine <= coarse + slack
        assert residuals[-1] <= residuals[0] + 1e-9

    def test_default_target_is_prediction(self, make_tiny, tone_store, tone_plan):
        m = make_tiny()
        x = tone_store.read_tensor(tone_plan.val_ids[1])
        m.net.eval()
        with torch.no_grad():
            predicted = int(m.forward(torch.as_tensor(x.values)[None]).argmax())
        assert integrated_gradients(m, x, steps=8).target == predicted

    def test_model_left_untouched(self, make_tiny, tone_store, tone_plan):
        m = make_tiny()
        before = m.checksum()
        integrated_gradients(m, tone_store.read_tensor(tone_plan.val_ids[0]), steps=4)
        assert m.checksum() == before
        assert next(m.net.parameters()).dtype == torch.float32


class TestBaselineAndOverlap:
    """Baseline construction, energy overlap and rendering."""

    def test_channel_minimum_baseline(self):
        x = np.random.default_rng(4).normal(size=SHAPE)
        base = channel_minimum_baseline(x).values
        for c in range(3):
            assert np.all(base[c] == np.float32(x[c].min()))

    def test_attribution_follows_burst(self):
        x = burst()
        w = torch.ones(SHAPE, dtype=torch.float64)
        a = integrate_gradients(linear_scorer(w), x, channel_minimum_baseline(x).values, steps=4)
        iou = attribution_energy_iou(x, a)
        assert iou > 0.2
        assert iou == pytest.approx(1.0)

    def test_zero_attribution_has_no_overlap(self):
        assert attribution_energy_iou(burst(), np.zeros(SHAPE)) == 0.0

    def test_iou_shape_mismatch(self):
        with pytest.raises(DomainError):
            attribution_energy_iou(burst(), np.zeros((3, 20, 9)))

    def test_quantile_range(self):
        with pytest.raises(DomainError):
            attribution_energy_iou(burst(), np.zeros(SHAPE), quantile=1.0)

    def test_render_writes_png(self, tmp_path):
        pytest.importorskip("matplotlib")
        x = burst()
        a = AttributionMap(
            values=x * 0.5, baseline=np.zeros(SHAPE), steps=1, target=0, residual=0.0, output_delta=1.0
        )
        path = render_attribution(x, a, tmp_path / "ig" / "burst.png")
        assert path.exists()
        assert path.read_bytes()[:4] == b"\x89PNG"

    def test_render_shape_mismatch(self, tmp_path):
        a = AttributionMap(
            values=np.zeros((3, 20, 9)), baseline=np.zeros((3, 20, 9)), steps=1, target=0,
            residual=0.0, output_delta=0.0,
        )
        with pytest.raises(DomainError):
            render_attribution(burst(), a, tmp_path / "x.png")
