"""Upper-tail outlier detection on fitted conditional quantiles.

Three rules are provided, all flagging only unusually large responses:

* residual -- flag when the residual from the conditional median exceeds a
  robust multiple of its spread,
* boxplot -- flag responses above a per-observation upper fence built from
  the conditional quartiles,
* score -- standardize each response by its conditional inter-quantile
  distance and flag scores above a user-chosen cut-off.

Censored observations receive residuals and scores exactly like events; only
the flagging rule is one-sided.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import Dataset
from .errors import MissingFit, ZeroSpread
from .gaussian import norm_ppf
from .solver import QuantileFit, predict_dataset

METHODS = ("residual", "boxplot", "score")

#: Quantile levels each detection rule needs fitted.
REQUIRED_TAUS = {
    "residual": (0.5,),
    "boxplot": (0.25, 0.75),
    "score": (0.25, 0.5, 0.75),
}


@dataclass(frozen=True)
class DetectorConfig:
    """Detection rule plus its tightness constants.

    ``k_s`` may be None, meaning the score cut-off has not been chosen yet:
    scoring then reports zero outliers and the decision is deferred until a
    re-threshold with an explicit value.
    """

    method: str = "score"
    k_r: float = 1.5
    k_b: float = 1.5
    k_s: float | None = None
    p_ref: float = 0.75

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if not (np.isfinite(self.k_r) and self.k_r > 0.0):
            raise ValueError("k_r must be a positive real")
        if not (np.isfinite(self.k_b) and self.k_b > 0.0):
            raise ValueError("k_b must be a positive real")
        if self.k_s is not None and not (np.isfinite(self.k_s) and self.k_s > 0.0):
            raise ValueError("k_s must be a positive real when given")
        if not 0.5 < self.p_ref < 1.0:
            raise ValueError("p_ref must lie in (0.5, 1)")


@dataclass(frozen=True)
class DetectionResult:
    """Flags plus the per-observation evidence behind them.

    ``evidence`` holds residuals, upper fences, or scores depending on the
    method; ``clamped`` lists indices where a degeneracy guard replaced a
    denominator or a crossed quantile pair.
    """

    method: str
    flags: np.ndarray
    evidence: np.ndarray
    cutoff_info: dict
    n_outliers: int = field(default=-1)
    clamped: tuple[int, ...] = ()
    statuses: np.ndarray | None = None

    def __post_init__(self):
        flags = np.asarray(self.flags, dtype=bool)
        evidence = np.asarray(self.evidence, dtype=float)
        if flags.shape != evidence.shape or flags.ndim != 1:
            raise ValueError("flags and evidence must be equal-length vectors")
        if not np.all(np.isfinite(evidence)):
            raise ValueError("evidence entries must be finite")
        object.__setattr__(self, "flags", flags)
        object.__setattr__(self, "evidence", evidence)
        object.__setattr__(self, "clamped", tuple(int(i) for i in self.clamped))
        if self.statuses is not None:
            object.__setattr__(
                self, "statuses", np.asarray(self.statuses, dtype=np.int8)
            )
        object.__setattr__(self, "n_outliers", int(np.sum(flags)))


def estimate_sigma(residuals, p_ref: float = 0.75) -> float:
    """Robust spread: median absolute residual over the matching normal quantile.

    Raises ZeroSpread when every residual is zero; callers that keep going
    treat the spread as zero and flag any strictly positive residual.
    """
    r = np.asarray(residuals, dtype=float)
    if r.size == 0:
        raise ValueError("residuals must be nonempty")
    if not np.all(np.isfinite(r)):
        raise ValueError("residuals must be finite")
    if not 0.5 < p_ref < 1.0:
        raise ValueError("p_ref must lie in (0.5, 1)")
    med = float(np.median(np.abs(r)))
    if med == 0.0:
        raise ZeroSpread("all absolute residuals are zero")
    return med / float(norm_ppf(p_ref))


def _require_tau(fit: QuantileFit, tau: float):
    if abs(fit.tau - tau) > 1e-12:
        raise ValueError(f"expected a fit at level {tau}, got {fit.tau}")


def detect_residual(
    d: Dataset, fit50: QuantileFit, cfg: DetectorConfig
) -> DetectionResult:
    """Flag observations whose median-fit residual exceeds k_r times the spread."""
    _require_tau(fit50, 0.5)
    r = d.times - predict_dataset(fit50, d)
    zero_spread = False
    try:
        sigma = estimate_sigma(r, cfg.p_ref)
    except ZeroSpread:
        sigma = 0.0
        zero_spread = True
    cutoff = cfg.k_r * sigma
    return DetectionResult(
        method="residual",
        flags=r > cutoff,
        evidence=r,
        cutoff_info={
            "k_r": cfg.k_r,
            "sigma_hat": sigma,
            "cutoff": cutoff,
            "zero_spread": zero_spread,
        },
        statuses=d.status,
    )


def detect_boxplot(
    d: Dataset, fit25: QuantileFit, fit75: QuantileFit, cfg: DetectorConfig
) -> DetectionResult:
    """Flag observations above their conditional upper fence.

    The fence at covariate x is Q(0.75|x) + k_b * IQR(x).  A crossed quantile
    pair (negative IQR) is clamped to zero width and the index recorded.
    """
    _require_tau(fit25, 0.25)
    _require_tau(fit75, 0.75)
    q25 = predict_dataset(fit25, d)
    q75 = predict_dataset(fit75, d)
    iqr = q75 - q25
    crossed = np.nonzero(iqr < 0.0)[0]
    iqr = np.maximum(iqr, 0.0)
    fence = q75 + cfg.k_b * iqr
    return DetectionResult(
        method="boxplot",
        flags=d.times > fence,
        evidence=fence,
        cutoff_info={"k_b": cfg.k_b},
        clamped=tuple(crossed),
        statuses=d.status,
    )


def _scores_with_guards(
    d: Dataset,
    fit25: QuantileFit,
    fit50: QuantileFit,
    fit75: QuantileFit,
) -> tuple[np.ndarray, tuple[int, ...]]:
    """Outlying scores plus the indices whose denominator was replaced."""
    _require_tau(fit25, 0.25)
    _require_tau(fit50, 0.5)
    _require_tau(fit75, 0.75)
    y = d.times
    q25 = predict_dataset(fit25, d)
    q50 = predict_dataset(fit50, d)
    q75 = predict_dataset(fit75, d)
    spread = float(np.max(y) - np.min(y))
    eps = max(1e-8 * spread, 1e-308)
    upper = y > q50
    den_up = q75 - q50
    den_lo = q25 - q50
    guarded_up = den_up < eps
    guarded_lo = den_lo > -eps
    den_up = np.maximum(den_up, eps)
    den_lo = np.minimum(den_lo, -eps)
    scores = np.where(upper, (y - q50) / den_up, (y - q50) / den_lo)
    clamped = np.nonzero(np.where(upper, guarded_up, guarded_lo))[0]
    return scores, tuple(int(i) for i in clamped)


def outlying_scores(
    d: Dataset,
    fit25: QuantileFit,
    fit50: QuantileFit,
    fit75: QuantileFit,
) -> np.ndarray:
    """Deviation from the conditional median in inter-quantile units.

    Responses above the median are divided by Q75 - Q50, responses at or
    below it by Q25 - Q50; both branches pair a signed numerator with a
    same-signed denominator, so scores are nonnegative in both tails.
    """
    scores, _ = _scores_with_guards(d, fit25, fit50, fit75)
    return scores


def detect_score(
    scores,
    cfg: DetectorConfig,
    statuses=None,
    clamped: tuple[int, ...] = (),
) -> DetectionResult:
    """Flag scores above k_s; with no k_s the decision is left undecided."""
    s = np.asarray(scores, dtype=float)
    if cfg.k_s is None:
        flags = np.zeros(s.shape, dtype=bool)
        info = {"k_s": None, "undecided": True}
    else:
        flags = s > cfg.k_s
        info = {"k_s": cfg.k_s, "undecided": False}
    return DetectionResult(
        method="score",
        flags=flags,
        evidence=s,
        cutoff_info=info,
        clamped=clamped,
        statuses=statuses,
    )


def run_detection(
    d: Dataset, fits: dict[float, QuantileFit], cfg: DetectorConfig
) -> DetectionResult:
    """Dispatch to the configured rule, pulling the levels it needs."""
    needed = REQUIRED_TAUS[cfg.method]
    missing = tuple(t for t in needed if t not in fits)
    if missing:
        raise MissingFit(missing)
    if cfg.method == "residual":
        return detect_residual(d, fits[0.5], cfg)
    if cfg.method == "boxplot":
        return detect_boxplot(d, fits[0.25], fits[0.75], cfg)
    scores, clamped = _scores_with_guards(d, fits[0.25], fits[0.5], fits[0.75])
    return detect_score(scores, cfg, statuses=d.status, clamped=clamped)
