"""Tests for the fusion, freeze and cutoff sweeps."""

import math

import pandas as pd
import pytest

from audioxfer.analysis import (
    CUT_POINTS,
    AblationCurve,
    AblationKind,
    build_ablation_model,
    run_ablation_suite,
    save_ablation_curve,
)
from audioxfer.errors import DomainError
from audioxfer.models import InitMode, load_checkpoint
from audioxfer.training import RunRegistry, TrainConfig, evaluate_model

TONE_INPUT = (128, 32)


@pytest.fixture
def sweep_cfg():
    return TrainConfig(epochs=1, batch_size=16, base_lr=1e-3, seed=0)


class TestBuildAblationModel:
    """One model per cut point."""

    def test_fusion_block4_is_pretrained(self, tiny_archive, make_tiny):
        m = build_ablation_model("fusion", "block4", "tiny", tiny_archive, 2, TONE_INPUT, seed=0)
        assert m.checksum() == make_tiny(InitMode.PRETRAINED, seed=0).checksum()

    def test_freeze_marks_prefix(self, tiny_archive):
        m = build_ablation_model("freeze", "block1", "tiny", tiny_archive, 2, TONE_INPUT, seed=0)
        assert m.net.frozen == ("stem", "block1")
        assert m.frozen_through == "block1"

    def test_cutoff_drops_trailing_blocks(self, tiny_archive):
        m = build_ablation_model("cutoff", "block2", "tiny", tiny_archive, 2, TONE_INPUT, seed=0)
        assert m.net.segment_names == ("stem", "block1", "block2", "classifier")

    @pytest.mark.parametrize(("kind", "cut"), [("cutoff", "stem"), ("fusion", "classifier"), ("freeze", "block5")])
    def test_invalid_cut(self, tiny_archive, kind, cut):
        with pytest.raises(DomainError, match=cut):
            build_ablation_model(kind, cut, "tiny", tiny_archive, 2, TONE_INPUT, seed=0)

    def test_cut_point_tables(self):
        assert CUT_POINTS[AblationKind.FUSION][0] == "stem"
        assert CUT_POINTS[AblationKind.CUTOFF] == ("block2", "block3", "block4")


class TestRunAblationSuite:
    """Training across cut points."""

    def test_freeze_keeps_prefix_fixed(self, tone_store, tone_plan, tiny_archive, sweep_cfg, tmp_path):
        registry = RunRegistry(tmp_path)
        curve = run_ablation_suite(
            "freeze", "tiny", tone_store, tone_plan, sweep_cfg, tiny_archive,
            registry=registry, cut_points=["stem", "block2"],
        )
        assert curve.x == ["stem", "block2"]
        assert not curve.partial
        for run_id, cut in zip(curve.run_ids, curve.x):
            record = registry.load(run_id)
            assert record.tags["cut_point"] == cut
            assert record.tags["frozen_checksum_before"] == record.tags["frozen_checksum_after"]
            assert record.experiment == "freeze"

    def test_fusion_has_no_frozen_checksums(self, tone_store, tone_plan, tiny_archive, sweep_cfg, tmp_path):
        registry = RunRegistry(tmp_path)
        curve = run_ablation_suite(
            "fusion", "tiny", tone_store, tone_plan, sweep_cfg, tiny_archive,
            registry=registry, cut_points=["block1"],
        )
        assert "frozen_checksum_before" not in registry.load(curve.run_ids[0]).tags

    def test_cutoff_trains(self, tone_store, tone_plan, tiny_archive, sweep_cfg):
        curve = run_ablation_suite(
            AblationKind.CUTOFF, "tiny", tone_store, tone_plan, sweep_cfg, tiny_archive,
            cut_points=["block3"],
        )
        assert 0.0 <= curve.y[0] <= 1.0
        assert curve.extra == {"architecture": "tiny", "fold": tone_plan.label}

    @pytest.mark.parametrize(("kind", "points"), [("freeze", ["block1"]), ("cutoff", ["block2", "block3"])])
    def test_checkpoints_reproduce_curve(self, kind, points, tone_store, tone_plan, tiny_archive, sweep_cfg, tmp_path):
        registry = RunRegistry(tmp_path)
        curve = run_ablation_suite(
            kind, "tiny", tone_store, tone_plan, sweep_cfg, tiny_archive,
            registry=registry, cut_points=points,
        )
        for run_id, cut, accuracy in zip(curve.run_ids, curve.x, curve.y):
            reloaded = load_checkpoint(registry.load(run_id))
            if kind == "cutoff":
                assert reloaded.topology.last_kept == cut
            assert evaluate_model(reloaded, tone_store, tone_plan.val_ids).accuracy == accuracy

    def test_invalid_points_fail_before_training(self, tone_store, tone_plan, tiny_archive, sweep_cfg, tmp_path):
        registry = RunRegistry(tmp_path)
        with pytest.raises(DomainError):
            run_ablation_suite(
                "cutoff", "tiny", tone_store, tone_plan, sweep_cfg, tiny_archive,
                registry=registry, cut_points=["block3", "block1"],
            )
        assert registry.list_records() == []


class TestSaveAblationCurve:
    """CSV and figure output."""

    def test_writes_csv_and_png(self, tmp_path):
        pytest.importorskip("matplotlib")
        curve = AblationCurve(
            kind=AblationKind.FUSION,
            x=["stem", "block1", "block2"],
            y=[0.5, math.nan, 0.8],
            run_ids=["a", "b", "c"],
            partial=True,
            label="fusion",
        )
        csv_path, png_path = save_ablation_curve(curve, tmp_path / "out")
        assert csv_path.name == "fusion.csv"
        df = pd.read_csv(csv_path)
        assert list(df.columns) == ["cut_point", "val_accuracy", "run_id"]
        assert df["val_accuracy"].isna().sum() == 1
        assert png_path is not None and png_path.exists()

    def test_mismatched_lengths(self):
        with pytest.raises(DomainError):
            AblationCurve(kind=AblationKind.FREEZE, x=["stem"], y=[], run_ids=[])
