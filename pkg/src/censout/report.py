"""Human-readable summaries: the detection report and the coefficient table."""

from __future__ import annotations

import numpy as np

from .data import Dataset
from .detect import DetectionResult
from .errors import MissingFit
from .solver import QuantileFit

MODEL_LABEL = "locally weighted censored quantile regression"
MAX_DISPLAY_ROWS = 6

_ALGORITHM_LABEL = {"residual": "residual", "boxplot": "boxplot", "score": "scoring"}
_EVIDENCE_TITLE = {
    "residual": "residuals",
    "boxplot": "upper-fence exceedances",
    "score": "outlying scores",
}
_EVIDENCE_COLUMN = {"residual": "residual", "boxplot": "UF", "score": "score"}

COEF_LEVELS = (0.10, 0.25, 0.50, 0.75, 0.90)


def _cutoff_text(result: DetectionResult) -> str:
    info = result.cutoff_info
    if result.method == "residual":
        return format(info["cutoff"], ".4g")
    if result.method == "boxplot":
        return format(info["k_b"], ".4g")
    if info.get("k_s") is None:
        return "undecided"
    return format(info["k_s"], ".4g")


def _display_order(d: Dataset, result: DetectionResult) -> np.ndarray:
    """Most outlying first; ties broken by original row order."""
    if result.method == "boxplot":
        key = d.times - result.evidence
    else:
        key = result.evidence
    return np.lexsort((np.arange(d.n), -key))


def render_report(name: str, d: Dataset, result: DetectionResult) -> str:
    """Detection summary: header block plus the most outlying rows.

    Flagged rows are starred; the closing line counts how many of the flagged
    outliers made it into the displayed excerpt.
    """
    lines = [
        f"Data: {name}",
        f"Algorithm: {_ALGORITHM_LABEL[result.method]}",
        f"Model: {MODEL_LABEL}",
        f"Cut-off: {_cutoff_text(result)}",
        f"# of outliers detected: {result.n_outliers}",
        "",
    ]
    order = _display_order(d, result)
    shown = order[:MAX_DISPLAY_ROWS]
    lines.append(f"Top {len(shown)} {_EVIDENCE_TITLE[result.method]}:")

    originals = d.original_covariates()
    header = f"{'row':>6}"
    for cov in d.covariate_names:
        header += f"{cov:>10}"
    header += f"{'response':>10}{'delta':>6}"
    header += f"{_EVIDENCE_COLUMN[result.method]:>10}{'outlier':>9}"
    lines.append(header)

    for i in shown:
        row = f"{i + 1:>6}"
        for j in range(d.p):
            row += f"{format(originals[i, j], 'g'):>10}"
        row += f"{d.times[i]:>10.2f}{int(d.status[i]):>6}"
        row += f"{result.evidence[i]:>10.2f}"
        row += f"{'*' if result.flags[i] else '':>9}"
        lines.append(row)

    starred = int(np.sum(result.flags[shown]))
    lines.append("")
    lines.append(f"{starred} of all {result.n_outliers} outliers were displayed.")
    return "\n".join(lines) + "\n"


def coef_table(fits: dict[float, QuantileFit], covariate_names=()) -> str:
    """Five-level coefficient table, three decimals per cell."""
    missing = tuple(t for t in COEF_LEVELS if t not in fits)
    if missing:
        raise MissingFit(missing)
    labels = ["(Intercept)", *covariate_names]
    n_coef = len(fits[0.50].beta)
    if len(labels) != n_coef:
        labels = ["(Intercept)"] + [f"x{j}" for j in range(1, n_coef)]
    width = max(len(lab) for lab in labels) + 2
    head = " " * width + "".join(
        f"{'q' + format(int(round(t * 100)), 'd'):>10}" for t in COEF_LEVELS
    )
    lines = [head]
    for j, lab in enumerate(labels):
        row = f"{lab:<{width}}"
        for t in COEF_LEVELS:
            row += f"{fits[t].beta[j]:>10.3f}"
        lines.append(row)
    return "\n".join(lines) + "\n"
