"""Collect artifacts under an output directory and emit tables and figures.

Layout read (never written)::

    <out>/runs/<run_id>/record.json
    <out>/ensembles/<name>/ensemble.json
    <out>/analysis/svcca/<name>.json

Layout written::

    <out>/report/table_pretrained_vs_random.csv
    <out>/report/table_single_vs_ensemble.csv
    <out>/report/table_overall.csv
    <out>/report/transfer_curves.png
"""

import json
import logging
import math
from collections.abc import Iterable
from pathlib import Path
from typing import Any

from audioxfer.analysis.types import AblationCurve, AblationKind, WeightsChangeCurve
from audioxfer.models.types import SEGMENTS, Architecture
from audioxfer.reporting.tables import (
    table_overall,
    table_pretrained_vs_random,
    table_single_vs_ensemble,
)
from audioxfer.training.registry import RunRegistry
from audioxfer.training.types import RunRecord

logger = logging.getLogger(__name__)

ENSEMBLES_DIR = "ensembles"
ANALYSIS_DIR = "analysis"
SVCCA_DIR = "svcca"
REPORT_DIR = "report"
TRANSFER_FIGURE = "transfer_curves.png"


def load_ensemble_descriptors(root: str | Path) -> list[dict[str, Any]]:
    """Every ``ensembles/*/ensemble.json`` under ``root``, sorted by directory."""
    base = Path(root) / ENSEMBLES_DIR
    if not base.is_dir():
        return []
    return [json.loads(p.read_text()) for p in sorted(base.glob("*/ensemble.json"))]


def load_weights_change_curves(root: str | Path) -> list[WeightsChangeCurve]:
    """SVCCA curves saved by ``analyze svcca``; each file may hold several curves."""
    base = Path(root) / ANALYSIS_DIR / SVCCA_DIR
    if not base.is_dir():
        return []
    curves = []
    for path in sorted(base.glob("*.json")):
        data = json.loads(path.read_text())
        curves += [WeightsChangeCurve.from_dict(c) for c in data.get("curves", [])]
    return curves


def ablation_curves_from_records(records: Iterable[RunRecord]) -> list[AblationCurve]:
    """Rebuild fusion, freeze and cutoff curves from their persisted runs.

    Points are ordered by segment; diverged points become NaN and mark the
    curve partial.
    """
    kinds = {k.value for k in AblationKind}
    grouped: dict[tuple[str, str], list[RunRecord]] = {}
    for r in records:
        if r.experiment in kinds and "cut_point" in r.tags:
            grouped.setdefault((r.experiment, r.architecture), []).append(r)

    curves = []
    for (kind, arch), runs in sorted(grouped.items()):
        runs = sorted(runs, key=lambda r: SEGMENTS.index(r.tags["cut_point"]))
        ys = [
            float(r.final_val_accuracy) if r.is_completed and r.final_val_accuracy is not None else math.nan
            for r in runs
        ]
        curves.append(
            AblationCurve(
                kind=AblationKind(kind),
                x=[r.tags["cut_point"] for r in runs],
                y=ys,
                run_ids=[r.run_id for r in runs],
                partial=any(math.isnan(y) for y in ys),
                label=f"{kind} ({Architecture(arch).value})",
            )
        )
    return curves


def write_report(root: str | Path, out_dir: str | Path | None = None) -> dict[str, Path]:
    """Write the three accuracy tables and, when curves exist, the transfer figure.

    Only reads from ``root``; output goes to ``out_dir`` (default ``<root>/report``).
    """
    root = Path(root)
    out = Path(out_dir) if out_dir is not None else root / REPORT_DIR
    out.mkdir(parents=True, exist_ok=True)

    records = RunRegistry(root).list_records()
    ensembles = load_ensemble_descriptors(root)
    logger.info(f"Reporting over {len(records)} runs and {len(ensembles)} ensembles in {root}")

    written = {}
    tables = {
        "table_pretrained_vs_random": table_pretrained_vs_random(records),
        "table_single_vs_ensemble": table_single_vs_ensemble(records, ensembles),
        "table_overall": table_overall(records, ensembles),
    }
    for name, df in tables.items():
        path = out / f"{name}.csv"
        df.to_csv(path, index=False)
        written[name] = path

    weights_change = load_weights_change_curves(root)
    ablations = ablation_curves_from_records(records)
    if weights_change or ablations:
        try:
            from audioxfer.visualization import plot_transfer_curves, save_figure

            written["transfer_curves"] = save_figure(
                plot_transfer_curves(weights_change, ablations), out / TRANSFER_FIGURE
            )
        except ImportError:
            logger.warning("matplotlib not installed; skipping transfer curves")
    return written
