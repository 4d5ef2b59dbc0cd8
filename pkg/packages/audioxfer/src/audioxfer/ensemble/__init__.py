"""Deep ensembles: identical members, distinct seeds, averaged softmax.

Usage:
    from audioxfer.ensemble import EnsembleConfig, run_ensemble, evaluate_ensemble

    run = run_ensemble(EnsembleConfig(members=5), "densenet", "pretrained", store, plan, train, archive=archive)
    result = evaluate_ensemble(run, store)
"""

from audioxfer.ensemble.config import EnsembleConfig
from audioxfer.ensemble.predict import (
    EnsemblePrediction,
    average_softmax,
    ensemble_evaluate,
    ensemble_predict,
    ensemble_predict_store,
)
from audioxfer.ensemble.runner import (
    DESCRIPTOR_FILE,
    MIN_HEALTHY_MEMBERS,
    REPORT_FILE,
    EnsembleResult,
    EnsembleRun,
    evaluate_ensemble,
    load_members,
    run_ensemble,
)

__all__ = [
    "DESCRIPTOR_FILE",
    "EnsembleConfig",
    "EnsemblePrediction",
    "EnsembleResult",
    "EnsembleRun",
    "MIN_HEALTHY_MEMBERS",
    "REPORT_FILE",
    "average_softmax",
    "ensemble_evaluate",
    "ensemble_predict",
    "ensemble_predict_store",
    "evaluate_ensemble",
    "load_members",
    "run_ensemble",
]
