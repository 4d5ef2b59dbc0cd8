"""Tests for accuracy tables and the report writer."""

import json
import math

import pandas as pd
import pytest

from audioxfer.reporting import (
    ENSEMBLES_DIR,
    ablation_curves_from_records,
    format_mean_std,
    format_percent,
    table_overall,
    table_pretrained_vs_random,
    table_single_vs_ensemble,
    write_report,
)
from audioxfer.training import RunRegistry
from audioxfer.training.types import STATUS_DIVERGED, RunRecord

# (architecture, dataset) -> (pretrained, random) accuracy in percent
PUBLISHED = {
    ("densenet", "gtzan"): (91.39, 88.50),
    ("densenet", "esc50"): (91.16, 72.50),
    ("densenet", "urbansound8k"): (85.14, 76.32),
    ("resnet", "gtzan"): (91.09, 87.90),
    ("resnet", "esc50"): (90.65, 67.40),
    ("resnet", "urbansound8k"): (84.76, 73.26),
    ("inception", "gtzan"): (90.00, 86.30),
    ("inception", "esc50"): (87.34, 64.50),
    ("inception", "urbansound8k"): (84.37, 75.24),
}


def record(run_id, dataset, architecture, init_mode, accuracy, experiment="train", **kwargs) -> RunRecord:
    return RunRecord(
        run_id=run_id,
        dataset=dataset,
        architecture=architecture,
        init_mode=init_mode,
        topology={"architecture": architecture, "depth": 0},
        train_config={},
        experiment=experiment,
        final_metrics=None if accuracy is None else {"accuracy": accuracy},
        **kwargs,
    )


def published_records() -> list[RunRecord]:
    out = []
    for (arch, ds), (pre, rand) in PUBLISHED.items():
        out.append(record(f"{arch}-{ds}-p", ds, arch, "pretrained", pre / 100))
        out.append(record(f"{arch}-{ds}-r", ds, arch, "random", rand / 100))
    return out


def ensemble_descriptor(dataset, architecture, accuracy, init_mode="pretrained") -> dict:
    return {
        "dataset": dataset,
        "architecture": architecture,
        "init_mode": init_mode,
        "ensemble_accuracy": accuracy,
    }


class TestFormatting:
    """Percent cells."""

    def test_percent(self):
        assert format_percent(0.725) == "72.50"
        assert format_percent(None) == "-"
        assert format_percent(math.nan) == "-"

    def test_mean_std(self):
        assert format_mean_std([0.9080, 0.9152]) == "91.16±0.36"
        assert format_mean_std([]) == "-"


class TestPretrainedVsRandom:
    """Pretrained and random columns per dataset."""

    def test_reproduces_published_values(self, tmp_path):
        registry = RunRegistry(tmp_path)
        for r in published_records():
            registry.save(r, figures=False)
        paths = write_report(tmp_path)

        df = pd.read_csv(paths["table_pretrained_vs_random"], dtype=str)
        assert list(df.columns) == [
            "Model",
            "GTZAN Pretrained", "GTZAN Random",
            "ESC-50 Pretrained", "ESC-50 Random",
            "UrbanSound8K Pretrained", "UrbanSound8K Random",
        ]
        assert list(df["Model"]) == ["DenseNet", "ResNet", "Inception"]
        dense = df.set_index("Model").loc["DenseNet"]
        assert dense["ESC-50 Pretrained"] == "91.16"
        assert dense["ESC-50 Random"] == "72.50"
        assert dense["GTZAN Pretrained"] == "91.39"
        resnet = df.set_index("Model").loc["ResNet"]
        assert resnet["UrbanSound8K Random"] == "73.26"
        inception = df.set_index("Model").loc["Inception"]
        assert inception["GTZAN Pretrained"] == "90.00"

    def test_missing_cell(self):
        df = table_pretrained_vs_random([record("a", "esc50", "densenet", "pretrained", 0.9)])
        assert df.loc[0, "ESC-50 Random"] == "-"

    def test_ignores_diverged_and_ablation_runs(self):
        records = [
            record("a", "esc50", "densenet", "pretrained", 0.9),
            record("b", "esc50", "densenet", "pretrained", None, status=STATUS_DIVERGED),
            record("c", "esc50", "densenet", "pretrained", 0.1, experiment="fusion", tags={"cut_point": "stem"}),
        ]
        assert table_pretrained_vs_random(records).loc[0, "ESC-50 Pretrained"] == "90.00"

    def test_folds_are_averaged(self):
        records = [
            record("a", "esc50", "densenet", "pretrained", 0.90, experiment="cv", fold_index=1),
            record("b", "esc50", "densenet", "pretrained", 0.92, experiment="cv", fold_index=2),
        ]
        assert table_pretrained_vs_random(records).loc[0, "ESC-50 Pretrained"] == "91.00"


class TestSingleVsEnsemble:
    """Single-model spread next to the ensemble."""

    def test_densenet_esc50(self):
        records = [
            record("a", "esc50", "densenet", "pretrained", 0.9080, experiment="cv"),
            record("b", "esc50", "densenet", "pretrained", 0.9152, experiment="cv"),
            record("c", "esc50", "densenet", "random", 0.70, experiment="cv"),
        ]
        df = table_single_vs_ensemble(records, [ensemble_descriptor("esc50", "densenet", 0.9289)])
        row = df.set_index("Model").loc["DenseNet (Pretrained)"]
        assert row["ESC-50 Single"] == "91.16±0.36"
        assert row["ESC-50 Ensemble"] == "92.89"

    def test_ensemble_without_singles(self):
        df = table_single_vs_ensemble([], [ensemble_descriptor("urbansound8k", "densenet", 0.8742)])
        assert df.loc[0, "UrbanSound8K Single"] == "-"
        assert df.loc[0, "UrbanSound8K Ensemble"] == "87.42"


class TestOverall:
    """Random, pretrained and ensemble rows for one architecture."""

    def test_rows(self):
        ensembles = [
            ensemble_descriptor("gtzan", "densenet", 0.9050),
            ensemble_descriptor("esc50", "densenet", 0.9289),
            ensemble_descriptor("urbansound8k", "densenet", 0.8742),
        ]
        df = table_overall(published_records(), ensembles).set_index("Model")
        assert list(df.columns) == ["GTZAN", "ESC-50", "UrbanSound8K"]
        assert df.loc["DenseNet (Random)", "UrbanSound8K"] == "76.32"
        assert df.loc["DenseNet (Pretrained)", "ESC-50"] == "91.16"
        assert df.loc["DenseNet (Pretrained Ensemble)", "GTZAN"] == "90.50"


class TestWriteReport:
    """Files written from an output directory."""

    def test_reads_ensemble_descriptors(self, tmp_path):
        target = tmp_path / ENSEMBLES_DIR / "esc50-densenet"
        target.mkdir(parents=True)
        (target / "ensemble.json").write_text(json.dumps(ensemble_descriptor("esc50", "densenet", 0.9289)))
        paths = write_report(tmp_path)
        df = pd.read_csv(paths["table_overall"], dtype=str)
        assert df.loc[2, "ESC-50"] == "92.89"
        assert paths["table_overall"].parent == tmp_path / "report"

    def test_empty_directory(self, tmp_path):
        paths = write_report(tmp_path, tmp_path / "elsewhere")
        assert set(paths) == {"table_pretrained_vs_random", "table_single_vs_ensemble", "table_overall"}
        assert all(p.parent == tmp_path / "elsewhere" for p in paths.values())

    def test_transfer_curves(self, tmp_path):
        pytest.importorskip("matplotlib")
        registry = RunRegistry(tmp_path)
        for i, cut in enumerate(("block2", "stem", "block1")):
            registry.save(
                record(f"f{i}", "esc50", "densenet", "pretrained", 0.5 + i / 10,
                       experiment="fusion", tags={"cut_point": cut}),
                figures=False,
            )
        curves = ablation_curves_from_records(registry.list_records())
        assert curves[0].x == ["stem", "block1", "block2"]
        assert not curves[0].partial
        assert write_report(tmp_path)["transfer_curves"].exists()
