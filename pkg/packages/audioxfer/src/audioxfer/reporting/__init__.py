"""Accuracy tables and transfer-learning figures from an output directory."""

from audioxfer.reporting.report import (
    ANALYSIS_DIR,
    ENSEMBLES_DIR,
    REPORT_DIR,
    SVCCA_DIR,
    ablation_curves_from_records,
    load_ensemble_descriptors,
    load_weights_change_curves,
    write_report,
)
from audioxfer.reporting.tables import (
    format_mean_std,
    format_percent,
    single_run_accuracies,
    table_overall,
    table_pretrained_vs_random,
    table_single_vs_ensemble,
)

__all__ = [
    "ANALYSIS_DIR",
    "ENSEMBLES_DIR",
    "REPORT_DIR",
    "SVCCA_DIR",
    "ablation_curves_from_records",
    "format_mean_std",
    "format_percent",
    "load_ensemble_descriptors",
    "load_weights_change_curves",
    "single_run_accuracies",
    "table_overall",
    "table_pretrained_vs_random",
    "table_single_vs_ensemble",
    "write_report",
]
