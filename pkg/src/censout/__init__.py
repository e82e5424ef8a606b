"""censout: upper-outlier detection for right-censored regression data.

The pipeline fits conditional quantiles by locally weighted censored quantile
regression -- censored observations have their mass split between the observed
time and a far pseudo-point according to a kernel-localized Kaplan-Meier
estimate -- and then flags unusually large responses with one of three rules
(residual, boxplot, score).  A compiled extension accelerates the exact
simplex solver and the survival-curve kernels when available; set
``CENSOUT_PURE=1`` to force the pure-Python implementation.
"""

from ._backend import backend_name
from .artifact import (
    AnalysisArtifact,
    DataBinding,
    artifact_from_json,
    artifact_to_json,
    bind_dataset,
    load_artifact,
    reload_dataset,
    save_artifact,
)
from .data import (
    IDENTITY,
    LOG,
    Dataset,
    Observation,
    format_number,
    load_csv,
    log_transform,
    scale_covariates,
    write_csv,
)
from .detect import (
    METHODS,
    REQUIRED_TAUS,
    DetectionResult,
    DetectorConfig,
    detect_boxplot,
    detect_residual,
    detect_score,
    estimate_sigma,
    outlying_scores,
    run_detection,
)
from .gaussian import norm_ppf
from .kernelkm import (
    BandwidthConfig,
    KernelDiagnostics,
    RedistributionWeights,
    biquadratic_kernel,
    censored_cdf_values,
    local_km_cdf,
    nw_weights,
    redistribution_weight,
    redistribution_weights,
)
from .report import coef_table, render_report
from .simulate import (
    SimConfig,
    SimMetrics,
    StudyResult,
    evaluate_detection,
    generate_dataset,
    run_study,
    study_csv,
    study_text,
)
from .solver import (
    QuantileFit,
    WeightedQRProblem,
    assemble_problem,
    fit_cqr,
    fit_quantiles,
    pinball_loss,
    predict_dataset,
    predict_quantile,
    solve_weighted_qr,
)
from .svgplot import qq_plot_svg, render_qq_svg

__version__ = "0.1.0"

__all__ = [
    "AnalysisArtifact",
    "BandwidthConfig",
    "DataBinding",
    "Dataset",
    "DetectionResult",
    "DetectorConfig",
    "IDENTITY",
    "KernelDiagnostics",
    "LOG",
    "METHODS",
    "Observation",
    "QuantileFit",
    "REQUIRED_TAUS",
    "RedistributionWeights",
    "SimConfig",
    "SimMetrics",
    "StudyResult",
    "WeightedQRProblem",
    "artifact_from_json",
    "artifact_to_json",
    "assemble_problem",
    "backend_name",
    "bind_dataset",
    "biquadratic_kernel",
    "censored_cdf_values",
    "coef_table",
    "detect_boxplot",
    "detect_residual",
    "detect_score",
    "estimate_sigma",
    "evaluate_detection",
    "fit_cqr",
    "fit_quantiles",
    "format_number",
    "generate_dataset",
    "load_artifact",
    "load_csv",
    "local_km_cdf",
    "log_transform",
    "norm_ppf",
    "nw_weights",
    "outlying_scores",
    "pinball_loss",
    "predict_dataset",
    "predict_quantile",
    "qq_plot_svg",
    "redistribution_weight",
    "redistribution_weights",
    "reload_dataset",
    "render_qq_svg",
    "render_report",
    "run_detection",
    "run_study",
    "save_artifact",
    "scale_covariates",
    "solve_weighted_qr",
    "study_csv",
    "study_text",
    "write_csv",
    "__version__",
]
