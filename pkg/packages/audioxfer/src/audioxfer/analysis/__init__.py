"""Transfer-learning probes: SVCCA weights change, ablations, attributions.

Usage:
    from audioxfer.analysis import weights_change_curve, run_ablation_suite

    curve = weights_change_curve(random_init, finetuned, store, val_ids, label="densenet201")
"""

from audioxfer.analysis.ablation import (
    CUT_POINTS,
    build_ablation_model,
    run_ablation_suite,
    save_ablation_curve,
)
from audioxfer.analysis.activations import capture_activations
from audioxfer.analysis.attribution import (
    DEFAULT_STEPS,
    attribution_energy_iou,
    channel_minimum_baseline,
    integrate_gradients,
    integrated_gradients,
    render_attribution,
)
from audioxfer.analysis.svcca import (
    DEFAULT_VARIANCE_KEEP,
    canonical_correlations,
    svcca_similarity,
    svd_reduce,
    weights_change_curve,
)
from audioxfer.analysis.types import (
    AblationCurve,
    AblationKind,
    ActivationMatrix,
    AttributionMap,
    CcaReport,
    WeightsChangeCurve,
)

__all__ = [
    "AblationCurve",
    "AblationKind",
    "ActivationMatrix",
    "AttributionMap",
    "CUT_POINTS",
    "CcaReport",
    "DEFAULT_STEPS",
    "DEFAULT_VARIANCE_KEEP",
    "WeightsChangeCurve",
    "attribution_energy_iou",
    "build_ablation_model",
    "canonical_correlations",
    "capture_activations",
    "channel_minimum_baseline",
    "integrate_gradients",
    "integrated_gradients",
    "render_attribution",
    "run_ablation_suite",
    "save_ablation_curve",
    "svcca_similarity",
    "svd_reduce",
    "weights_change_curve",
]
