"""End-to-end CLI pipeline on the synthetic tone corpus.

Runs every command the full-scale experiments use, on CPU, against a
fresh output directory: make-tones, prep, pretrain-tiny, train, ensemble,
cross-validate, analyze (svcca, fusion, freeze, cutoff, ig) and report.
"""

import json
from pathlib import Path

import pandas as pd
import pytest

from audioxfer.cli import EXIT_OK, main
from audioxfer.training import RunRegistry

CONFIG = Path(__file__).parent.parent.parent / "configs" / "tones_tiny.toml"

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """Tone corpus, feature store and tiny archive shared by the module."""
    base = tmp_path_factory.mktemp("pipeline")
    corpus = base / "tones"
    out = base / "out"
    archive = base / "weights" / "tiny"
    common = ["-c", str(CONFIG), "--root", str(corpus), "-o", str(out), "--archive", str(archive), "-q"]

    assert main(["make-tones", str(corpus), "-q"]) == EXIT_OK
    assert main(["prep", *common]) == EXIT_OK
    assert main(["pretrain-tiny", str(archive), *common, "--epochs", "2"]) == EXIT_OK
    return {"out": out, "archive": archive, "common": common}


def last_line(capsys) -> Path:
    return Path(capsys.readouterr().out.strip().splitlines()[-1])


class TestTonePipeline:
    """Each command leaves its artifacts behind."""

    def test_archive_written(self, workspace):
        assert (workspace["archive"] / "index.json").exists()

    def test_train_and_analyze(self, workspace, capsys):
        common = workspace["common"]
        assert main(["train", *common, "--epochs", "1"]) == EXIT_OK
        run_dir = last_line(capsys)
        record = json.loads((run_dir / "record.json").read_text())
        assert record["init_mode"] == "pretrained"
        assert record["pretrained_through"] == "block4"

        assert main(["analyze", "svcca", *common, "--run", run_dir.name]) == EXIT_OK
        svcca = last_line(capsys)
        curves = json.loads(svcca.read_text())["curves"]
        assert [r["probe_point"] for r in curves[0]["reports"]] == ["stem", "block1", "classifier"]

        assert main(["analyze", "ig", *common, "--run", run_dir.name, "--steps", "16"]) == EXIT_OK
        png = last_line(capsys)
        assert png.suffix == ".png"
        payload = json.loads(png.with_suffix(".json").read_text())
        assert payload["steps"] == 16
        assert 0.0 <= payload["energy_iou"] <= 1.0

    @pytest.mark.parametrize("kind", ["fusion", "freeze", "cutoff"])
    def test_ablation(self, workspace, capsys, kind):
        assert main(["analyze", kind, *workspace["common"], "--epochs", "1"]) == EXIT_OK
        df = pd.read_csv(last_line(capsys))
        expected = 3 if kind == "cutoff" else 5
        assert len(df) == expected
        assert df["val_accuracy"].between(0, 1).all()

    def test_ensemble(self, workspace, capsys):
        assert main(["ensemble", *workspace["common"], "--epochs", "1"]) == EXIT_OK
        descriptor = json.loads((last_line(capsys) / "ensemble.json").read_text())
        assert descriptor["seeds"] == [0, 1, 2]
        assert descriptor["dataset"] == "tones"

    def test_cross_validate(self, workspace, capsys):
        assert main(["cross-validate", *workspace["common"], "--epochs", "1"]) == EXIT_OK
        folds = pd.read_csv(last_line(capsys) / "folds.csv")
        assert len(folds) == 5

    def test_report_last(self, workspace, capsys):
        """Runs after the others in file order and tabulates what they left."""
        assert main(["report", *workspace["common"]]) == EXIT_OK
        printed = capsys.readouterr().out.split()
        table = next(Path(p) for p in printed if p.endswith("table_pretrained_vs_random.csv"))
        df = pd.read_csv(table, dtype=str).set_index("Model")
        assert df.loc["Tiny", "tones Pretrained"] != "-"
        assert len(RunRegistry(workspace["out"]).list_records()) > 0
