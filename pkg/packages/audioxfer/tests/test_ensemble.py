"""Tests for seeded ensembles and softmax averaging."""

import dataclasses
import json

import numpy as np
import pytest
import torch
from pydantic import ValidationError
from scipy.special import softmax

from audioxfer.ensemble import (
    EnsembleConfig,
    EnsembleRun,
    average_softmax,
    ensemble_evaluate,
    ensemble_predict,
    evaluate_ensemble,
    run_ensemble,
)
from audioxfer.ensemble.runner import DESCRIPTOR_FILE, REPORT_FILE
from audioxfer.errors import DomainError, InsufficientMembersError
from audioxfer.models import CONV_SEGMENTS, InitMode, build_backbone
from audioxfer.training import STATUS_DIVERGED, RunRegistry, TrainConfig, backbone_factory, evaluate_model


@pytest.fixture
def member_cfg():
    return TrainConfig(epochs=1, batch_size=16, base_lr=1e-3)


class TestEnsembleConfig:
    """Member seeds."""

    def test_seeds_from_root(self):
        cfg = EnsembleConfig(members=5, root_seed=10)
        assert cfg.member_seeds == (10, 11, 12, 13, 14)

    def test_explicit_seeds(self):
        assert EnsembleConfig(members=2, seeds=[7, 3]).member_seeds == (7, 3)

    def test_duplicate_seeds_rejected(self):
        with pytest.raises(ValidationError, match="distinct"):
            EnsembleConfig(members=2, seeds=[4, 4])

    def test_seed_count_must_match(self):
        with pytest.raises(ValidationError):
            EnsembleConfig(members=3, seeds=[1, 2])

    def test_needs_two_members(self):
        with pytest.raises(ValidationError):
            EnsembleConfig(members=1)


class TestAverageSoftmax:
    """Probabilities are averaged, not logits."""

    def test_one_hot_average(self):
        pred = average_softmax([np.array([[100.0, -100.0]]), np.array([[-100.0, 100.0]])])
        np.testing.assert_allclose(pred.mean_probs, [[0.5, 0.5]], atol=1e-12)

    def test_softmax_before_mean(self):
        """Mean logits favor class 0; mean probabilities favor class 1."""
        logits = [np.array([[10.0, 0.0]]), np.array([[0.0, 3.0]]), np.array([[0.0, 3.0]])]
        assert np.mean(logits, axis=0).argmax() == 0
        assert average_softmax(logits).labels[0] == 1

    def test_permutation_invariant(self):
        rng = np.random.default_rng(0)
        logits = [rng.normal(size=(20, 5)) for _ in range(4)]
        a = average_softmax(logits).mean_probs
        b = average_softmax(logits[::-1]).mean_probs
        np.testing.assert_allclose(a, b, atol=1e-9)

    def test_rows_are_distributions(self):
        rng = np.random.default_rng(1)
        pred = average_softmax([rng.normal(size=(6, 3)) for _ in range(3)])
        np.testing.assert_allclose(pred.mean_probs.sum(axis=1), 1.0)
        assert pred.num_members == 3
        assert pred.member_labels().shape == (3, 6)

    def test_shape_mismatch(self):
        with pytest.raises(DomainError):
            average_softmax([np.zeros((2, 3)), np.zeros((2, 4))])

    def test_empty(self):
        with pytest.raises(DomainError):
            average_softmax([])


class TestEnsemblePredict:
    """Averaging live models."""

    def test_identical_members(self, make_tiny):
        m = make_tiny()
        x = torch.randn(4, 3, 128, 32)
        pred = ensemble_predict([m, m, m], x)
        m.net.eval()
        with torch.no_grad():
            single = softmax(m.forward(x).double().numpy(), axis=1)
        np.testing.assert_allclose(pred.mean_probs, single, atol=1e-7)

    def test_class_count_mismatch(self, make_tiny):
        other = build_backbone("tiny", "random", 3, seed=0, input_size=(128, 32))
        with pytest.raises(DomainError, match="classes"):
            ensemble_predict([make_tiny(), other], torch.randn(1, 3, 128, 32))

    def test_single_member_matches_evaluate(self, make_tiny, tone_store, tone_plan):
        m = make_tiny(seed=2)
        single = evaluate_model(m, tone_store, tone_plan.val_ids)
        ens = ensemble_evaluate([m], tone_store, tone_plan.val_ids)
        assert ens.accuracy == single.accuracy
        assert np.array_equal(ens.confusion, single.confusion)


class TestRunEnsemble:
    """Training and evaluating members."""

    def test_pretrained_members_share_body(self, tone_store, tiny_archive):
        """At epoch 0 members differ only in the head."""
        a = backbone_factory("tiny", InitMode.PRETRAINED, tone_store, 0, archive=tiny_archive)(None)
        b = backbone_factory("tiny", InitMode.PRETRAINED, tone_store, 1, archive=tiny_archive)(None)
        assert a.checksum(CONV_SEGMENTS) == b.checksum(CONV_SEGMENTS)
        assert a.checksum(["classifier"]) != b.checksum(["classifier"])

    def test_members_and_descriptor(self, tone_store, tone_plan, tiny_archive, member_cfg, tmp_path):
        cfg = EnsembleConfig(members=3, root_seed=5)
        run = run_ensemble(
            cfg, "tiny", InitMode.PRETRAINED, tone_store, tone_plan, member_cfg,
            registry=RunRegistry(tmp_path), archive=tiny_archive,
        )
        assert [r.seed for r in run.records] == [5, 6, 7]
        assert [r.tags["ensemble_member"] for r in run.records] == [0, 1, 2]
        assert all(r.experiment == "ensemble" for r in run.records)

        result = evaluate_ensemble(run, tone_store)
        assert 0.0 <= result.accuracy <= 1.0
        assert result.dataset == "tones"
        assert result.init_mode == "pretrained"
        assert result.split == "fold1"

        out = result.save(tmp_path / "ens")
        descriptor = json.loads((out / DESCRIPTOR_FILE).read_text())
        assert descriptor["seeds"] == [5, 6, 7]
        assert descriptor["ensemble_accuracy"] == result.accuracy
        assert len(descriptor["members"]) == 3
        report = (out / REPORT_FILE).read_text().splitlines()
        assert report[-1].startswith("ensemble,")

    def test_reload_from_checkpoints(self, tone_store, tone_plan, member_cfg, tmp_path):
        cfg = EnsembleConfig(members=2)
        run = run_ensemble(
            cfg, "tiny", "random", tone_store, tone_plan, member_cfg, registry=RunRegistry(tmp_path)
        )
        live = evaluate_ensemble(run, tone_store)
        reloaded = evaluate_ensemble(dataclasses.replace(run, models=[]), tone_store)
        assert reloaded.accuracy == live.accuracy

    def test_diverged_member_excluded(self, tone_store, tone_plan, member_cfg):
        run = run_ensemble(EnsembleConfig(members=3), "tiny", "random", tone_store, tone_plan, member_cfg)
        bad = dataclasses.replace(run.records[2], status=STATUS_DIVERGED)
        flagged = EnsembleRun(run.config, run.plan, [*run.records[:2], bad], run.models[:2])

        result = evaluate_ensemble(flagged, tone_store)
        assert result.excluded == [bad.run_id]

        lonely = EnsembleRun(run.config, run.plan, [run.records[0], bad], run.models[:1])
        with pytest.raises(InsufficientMembersError):
            evaluate_ensemble(lonely, tone_store)

    @pytest.mark.slow
    def test_overfit_members_not_beaten(self, tone_store, tone_plan, tiny_archive):
        """Averaging three fitted members stays within 2 points of the best one."""
        train = TrainConfig(epochs=10, batch_size=8, base_lr=1e-3)
        run = run_ensemble(
            EnsembleConfig(members=3, root_seed=0), "tiny", InitMode.PRETRAINED,
            tone_store, tone_plan, train, archive=tiny_archive,
        )
        assert len(run.healthy) == 3
        for m in run.models:
            assert evaluate_model(m, tone_store, tone_plan.train_ids).accuracy >= 0.95

        best = max(r.final_val_accuracy for r in run.records)
        assert evaluate_ensemble(run, tone_store).accuracy >= best - 0.02
