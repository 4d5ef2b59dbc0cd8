"""Tests for activation capture and SVCCA similarity."""

import numpy as np
import pytest

from audioxfer.analysis import (
    ActivationMatrix,
    capture_activations,
    svcca_similarity,
    svd_reduce,
    weights_change_curve,
)
from audioxfer.errors import DegenerateInputError, DomainError, InsufficientSamplesError
from audioxfer.models import InitMode
from audioxfer.training import TrainConfig, train_model

PROBES = ("stem", "block1", "block2", "classifier")


def act(values: np.ndarray, point: str = "block1") -> ActivationMatrix:
    return ActivationMatrix(values=values, probe_point=point)


def cca_by_covariance(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Canonical correlations from the eigenvalues of Saa^-1 Sab Sbb^-1 Sba."""
    a = a - a.mean(axis=0)
    b = b - b.mean(axis=0)
    saa, sbb, sab = a.T @ a, b.T @ b, a.T @ b
    m = np.linalg.solve(saa, sab) @ np.linalg.solve(sbb, sab.T)
    eig = np.clip(np.real(np.linalg.eigvals(m)), 0.0, None)
    return np.sort(np.sqrt(eig))[::-1]


class TestSvccaSimilarity:
    """Closed-form properties of SVCCA."""

    def test_self_similarity(self):
        a = np.random.default_rng(0).normal(size=(200, 10))
        report = svcca_similarity(act(a), act(a))
        np.testing.assert_allclose(report.correlations, 1.0, atol=1e-6)
        assert report.mean == pytest.approx(1.0, abs=1e-6)

    def test_invariant_to_invertible_map(self):
        rng = np.random.default_rng(1)
        a = rng.normal(size=(300, 12))
        r = np.eye(12) + 0.3 * rng.normal(size=(12, 12))
        report = svcca_similarity(act(a), act(a @ r), variance_keep=1.0)
        assert report.mean == pytest.approx(1.0, abs=1e-5)

    def test_independent_gaussians(self):
        rng = np.random.default_rng(2)
        a, b = rng.normal(size=(1000, 10)), rng.normal(size=(1000, 10))
        report = svcca_similarity(act(a), act(b), variance_keep=1.0)
        assert report.mean < 0.2
        np.testing.assert_allclose(report.correlations, cca_by_covariance(a, b), atol=1e-6)

    def test_symmetric(self):
        rng = np.random.default_rng(3)
        a = rng.normal(size=(150, 8))
        b = a[:, :5] @ rng.normal(size=(5, 6)) + 0.5 * rng.normal(size=(150, 6))
        assert svcca_similarity(act(a), act(b)).mean == pytest.approx(
            svcca_similarity(act(b), act(a)).mean, abs=1e-6
        )

    def test_correlations_in_unit_interval(self):
        rng = np.random.default_rng(4)
        a = rng.normal(size=(120, 6))
        b = a @ rng.normal(size=(6, 9)) + rng.normal(size=(120, 9))
        rho = svcca_similarity(act(a), act(b)).correlations
        assert (rho >= 0).all()
        assert (rho <= 1 + 1e-8).all()
        assert np.all(np.diff(rho) <= 0)

    def test_truncation_drops_weak_directions(self):
        rng = np.random.default_rng(5)
        strong = rng.normal(size=(500, 2)) * 100.0
        weak = rng.normal(size=(500, 8)) * 0.01
        reduced = svd_reduce(np.hstack([strong, weak]), 0.99)
        assert reduced.shape == (500, 2)

    def test_too_few_rows(self):
        rng = np.random.default_rng(6)
        a = rng.normal(size=(5, 10))
        with pytest.raises(InsufficientSamplesError):
            svcca_similarity(act(a), act(rng.normal(size=(5, 10))), variance_keep=1.0)

    def test_constant_side(self):
        a = np.random.default_rng(7).normal(size=(50, 4))
        with pytest.raises(DegenerateInputError):
            svcca_similarity(act(a), act(np.ones((50, 4))))

    def test_rows_must_align(self):
        rng = np.random.default_rng(8)
        with pytest.raises(DomainError, match="row-aligned"):
            svcca_similarity(act(rng.normal(size=(50, 4))), act(rng.normal(size=(40, 4))))

    def test_variance_keep_range(self):
        a = np.random.default_rng(9).normal(size=(50, 4))
        with pytest.raises(DomainError):
            svcca_similarity(act(a), act(a), variance_keep=0.0)


class TestCaptureActivations:
    """Pooled segment outputs via forward hooks."""

    def test_shapes(self, make_tiny, tone_store, tone_manifest):
        ids = tone_manifest.clip_ids
        stem, block1, head = capture_activations(
            make_tiny(), ["stem", "block1", "classifier"], tone_store, ids
        )
        assert (stem.n, stem.d) == (len(ids), 8)
        assert block1.d == 16
        assert head.d == 2

    def test_deterministic(self, make_tiny, tone_store, tone_plan):
        m = make_tiny()
        a = capture_activations(m, ["block2"], tone_store, tone_plan.val_ids)[0]
        b = capture_activations(m, ["block2"], tone_store, tone_plan.val_ids)[0]
        assert np.array_equal(a.values, b.values)

    def test_no_hooks_left_behind(self, make_tiny, tone_store, tone_plan):
        m = make_tiny()
        capture_activations(m, ["block1"], tone_store, tone_plan.val_ids)
        assert not m.net.segment("block1")._forward_hooks

    def test_unknown_probe(self, make_tiny, tone_store, tone_plan):
        with pytest.raises(DomainError, match="block7"):
            capture_activations(make_tiny(), ["block7"], tone_store, tone_plan.val_ids)


class TestWeightsChangeCurve:
    """Before/after similarity per segment."""

    def test_unchanged_model(self, make_tiny, tone_store, tone_manifest):
        m = make_tiny(InitMode.PRETRAINED)
        curve = weights_change_curve(m, m, tone_store, tone_manifest.clip_ids, probe_points=PROBES)
        assert curve.points == list(PROBES)
        np.testing.assert_allclose(curve.values, 1.0, atol=1e-6)

    def test_layout_mismatch(self, make_tiny, tone_store, tone_manifest):
        from audioxfer.models import truncate_after

        m = make_tiny()
        with pytest.raises(DomainError):
            weights_change_curve(m, truncate_after(m, "block3"), tone_store, tone_manifest.clip_ids)

    def test_serialization(self, make_tiny, tone_store, tone_manifest):
        m = make_tiny()
        curve = weights_change_curve(
            m, m, tone_store, tone_manifest.clip_ids, probe_points=("stem",), label="tiny"
        )
        restored = type(curve).from_dict(curve.to_dict())
        assert restored.label == "tiny"
        assert restored.values == curve.values
        assert list(curve.to_dataframe().columns) == ["label", "probe_point", "svcca_mean"]

    @pytest.mark.slow
    def test_fine_tuning_stays_closer_than_reinit(self, make_tiny, tone_store, tone_plan, tone_manifest):
        """Fine-tuned weights stay more similar to their start than a fresh random net."""
        before = make_tiny(InitMode.PRETRAINED, seed=0)
        tuned = make_tiny(InitMode.PRETRAINED, seed=0)
        train_model(tuned, tone_store, tone_plan, TrainConfig(epochs=2, batch_size=16, base_lr=1e-4))
        fresh = make_tiny(InitMode.RANDOM, seed=9)
        probes = ("stem", "block1", "block2")

        near = weights_change_curve(before, tuned, tone_store, tone_manifest.clip_ids, probe_points=probes)
        far = weights_change_curve(before, fresh, tone_store, tone_manifest.clip_ids, probe_points=probes)
        assert np.mean(far.values) < np.mean(near.values)
