"""Monte Carlo study harness: heteroscedastic censored data with planted outliers.

Each replicate draws a discrete covariate, builds log-scale responses around a
linear trend with covariate-dependent noise, right-censors the clean rows at an
independent uniform bound, appends a block of shifted upper outliers that are
never censored, then runs each configured detector and scores it against the
planted truth.

Randomness is split into named streams keyed by (seed, replicate, purpose), so
replicates can run in any order -- or in parallel -- and reproduce bit-for-bit.
Normal draws go through the inverse-CDF transform of exactly representable
uniforms to keep streams stable across platforms.
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass, field

import numpy as np

from .data import LOG, Dataset, format_number, scale_covariates
from .detect import METHODS, REQUIRED_TAUS, DetectorConfig, run_detection
from .errors import CensoutError, LengthMismatch
from .gaussian import norm_ppf
from .kernelkm import BandwidthConfig
from .solver import fit_quantiles

_PURPOSE_COVARIATE = 0
_PURPOSE_NOISE = 1
_PURPOSE_CENSOR = 2

_COVARIATE_LOW = 1
_COVARIATE_HIGH = 20


@dataclass(frozen=True)
class SimConfig:
    """Generator shape, detector grid, and reproducibility key for one study."""

    n_clean: int = 480
    n_outlier: int = 20
    beta0: float = 10.0
    beta1: float = -0.3
    c: float = 3.0
    censor_upper: float = 40.0
    replicates: int = 100
    seed: int = 0
    detector_grid: tuple[tuple[str, float], ...] = ()
    bandwidth: BandwidthConfig = field(default_factory=BandwidthConfig)

    def __post_init__(self):
        if self.n_clean < 1 or self.n_outlier < 1 or self.replicates < 1:
            raise ValueError("n_clean, n_outlier, and replicates must be >= 1")
        if not (np.isfinite(self.censor_upper) and self.censor_upper > 0.0):
            raise ValueError("censor_upper must be a positive real")
        if not (np.isfinite(self.c) and self.c > 0.0):
            raise ValueError("c must be a positive real")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit nonnegative integer")
        grid = []
        for method, cutoff in self.detector_grid:
            if method not in METHODS:
                raise ValueError(f"unknown method {method!r} in detector grid")
            cutoff = float(cutoff)
            if not (np.isfinite(cutoff) and cutoff > 0.0):
                raise ValueError("grid cutoffs must be positive reals")
            grid.append((method, cutoff))
        object.__setattr__(self, "detector_grid", tuple(grid))


@dataclass(frozen=True)
class SimMetrics:
    """Confusion counts and rates, either one replicate or a mean over many."""

    accuracy: float
    sensitivity: float
    specificity: float
    tp: float
    fp: float
    tn: float
    fn: float
    n_selected: float
    replicates_used: int

    @classmethod
    def from_counts(
        cls, tp: float, fp: float, tn: float, fn: float, replicates_used: int = 1
    ) -> "SimMetrics":
        n_true = tp + fn
        n_null = fp + tn
        total = n_true + n_null
        return cls(
            accuracy=(tp + tn) / total if total > 0 else 1.0,
            sensitivity=tp / n_true if n_true > 0 else 1.0,
            specificity=tn / n_null if n_null > 0 else 1.0,
            tp=tp,
            fp=fp,
            tn=tn,
            fn=fn,
            n_selected=tp + fp,
            replicates_used=replicates_used,
        )


def _stream(seed: int, replicate: int, purpose: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(entropy=(int(seed), int(replicate), int(purpose)))
    )


def _uniform_open(rng: np.random.Generator, size: int) -> np.ndarray:
    """Uniforms on (0, 1) built from 53-bit integers, identical on any platform."""
    return rng.integers(1, 2**53, size=size) * 2.0**-53


def generate_dataset(cfg: SimConfig, replicate_index: int) -> tuple[Dataset, np.ndarray]:
    """One synthetic dataset plus the truth mask of its planted outliers.

    Clean rows come first; the outlier block is shifted upward by c times the
    local noise scale plus the positive part of its own noise draw, and is
    stored uncensored.  Responses are kept on the log scale and the covariate
    is min-max scaled with its known support.
    """
    n = cfg.n_clean + cfg.n_outlier
    cov_rng = _stream(cfg.seed, replicate_index, _PURPOSE_COVARIATE)
    noise_rng = _stream(cfg.seed, replicate_index, _PURPOSE_NOISE)
    censor_rng = _stream(cfg.seed, replicate_index, _PURPOSE_CENSOR)

    x = cov_rng.integers(_COVARIATE_LOW, _COVARIATE_HIGH + 1, size=n).astype(float)
    sigma = np.exp((3.0 - x / 8.0) / 2.0)
    eps = sigma * norm_ppf(_uniform_open(noise_rng, n))
    trend = cfg.beta0 + cfg.beta1 * x

    log_t = np.empty(n)
    log_t[: cfg.n_clean] = trend[: cfg.n_clean] + eps[: cfg.n_clean]
    log_t[cfg.n_clean :] = (
        trend[cfg.n_clean :]
        + cfg.c * sigma[cfg.n_clean :]
        + np.maximum(0.0, eps[cfg.n_clean :])
    )

    log_c = cfg.censor_upper * _uniform_open(censor_rng, cfg.n_clean)
    times = log_t.copy()
    status = np.ones(n, dtype=np.int8)
    times[: cfg.n_clean] = np.minimum(log_t[: cfg.n_clean], log_c)
    status[: cfg.n_clean] = (log_t[: cfg.n_clean] <= log_c).astype(np.int8)

    truth = np.zeros(n, dtype=bool)
    truth[cfg.n_clean :] = True

    d = Dataset(
        times=times,
        status=status,
        covariates=x.reshape(-1, 1),
        covariate_names=("x",),
        response_transform=LOG,
    )
    d = scale_covariates(
        d, bounds=((float(_COVARIATE_LOW), float(_COVARIATE_HIGH)),)
    )
    return d, truth


def evaluate_detection(flags, truth) -> SimMetrics:
    """Confusion-matrix summary of one replicate's flags against the truth."""
    flags = np.asarray(flags, dtype=bool)
    truth = np.asarray(truth, dtype=bool)
    if flags.shape != truth.shape:
        raise LengthMismatch(
            f"flags have length {flags.size}, truth has length {truth.size}"
        )
    tp = int(np.sum(flags & truth))
    fp = int(np.sum(flags & ~truth))
    fn = int(np.sum(~flags & truth))
    tn = int(np.sum(~flags & ~truth))
    return SimMetrics.from_counts(tp, fp, tn, fn, replicates_used=1)


@dataclass(frozen=True)
class StudyResult:
    """Per-cell mean metrics plus bookkeeping for one run_study call."""

    config: SimConfig
    cells: tuple[tuple[str, float, SimMetrics], ...]
    mean_censoring: float
    failures: int


def _detector_config(method: str, cutoff: float) -> DetectorConfig:
    if method == "residual":
        return DetectorConfig(method=method, k_r=cutoff)
    if method == "boxplot":
        return DetectorConfig(method=method, k_b=cutoff)
    return DetectorConfig(method=method, k_s=cutoff)


def _run_replicate(args: tuple[SimConfig, int]):
    """Counts for every grid cell on one replicate; None if the fit failed."""
    cfg, r = args
    try:
        d, truth = generate_dataset(cfg, r)
        taus = sorted({t for m, _ in cfg.detector_grid for t in REQUIRED_TAUS[m]})
        fits = fit_quantiles(d, taus, cfg.bandwidth)
        censored = int(np.sum(d.status[: cfg.n_clean] == 0))
        counts = []
        for method, cutoff in cfg.detector_grid:
            res = run_detection(d, fits, _detector_config(method, cutoff))
            m = evaluate_detection(res.flags, truth)
            counts.append((int(m.tp), int(m.fp), int(m.tn), int(m.fn)))
        return censored, counts
    except CensoutError:
        return None


def run_study(cfg: SimConfig, workers: int | None = None) -> StudyResult:
    """Mean detector metrics over independent replicates.

    Replicates that fail numerically are excluded and counted instead of
    aborting the table.  Accumulation uses exact integer counts, so the result
    is independent of completion order; with ``workers`` > 1 the replicates run
    in separate processes.
    """
    if not cfg.detector_grid:
        raise ValueError("detector_grid must contain at least one (method, cutoff)")
    jobs = [(cfg, r) for r in range(cfg.replicates)]
    if workers is not None and workers > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_replicate, jobs, chunksize=1))
    else:
        outcomes = [_run_replicate(job) for job in jobs]

    n_cells = len(cfg.detector_grid)
    sums = np.zeros((n_cells, 4), dtype=np.int64)
    censored_total = 0
    used = 0
    for outcome in outcomes:
        if outcome is None:
            continue
        censored, counts = outcome
        censored_total += censored
        for k, row in enumerate(counts):
            sums[k] += row
        used += 1

    cells = []
    for k, (method, cutoff) in enumerate(cfg.detector_grid):
        if used == 0:
            metrics = SimMetrics.from_counts(0, 0, 0, 0, replicates_used=0)
        else:
            tp, fp, tn, fn = (float(v) / used for v in sums[k])
            metrics = SimMetrics.from_counts(tp, fp, tn, fn, replicates_used=used)
        cells.append((method, cutoff, metrics))
    mean_censoring = (
        censored_total / (used * cfg.n_clean) if used > 0 else float("nan")
    )
    return StudyResult(
        config=cfg,
        cells=tuple(cells),
        mean_censoring=mean_censoring,
        failures=cfg.replicates - used,
    )


STUDY_CSV_COLUMNS = (
    "c",
    "censor_upper",
    "method",
    "cutoff",
    "accuracy",
    "sensitivity",
    "specificity",
    "tp",
    "fp",
    "tn",
    "fn",
    "n_selected",
    "replicates_used",
)


def study_csv(result: StudyResult) -> bytes:
    """The study table as CSV with full-precision decimal values."""
    cfg = result.config
    lines = [",".join(STUDY_CSV_COLUMNS)]
    for method, cutoff, m in result.cells:
        lines.append(
            ",".join(
                [
                    format_number(cfg.c),
                    format_number(cfg.censor_upper),
                    method,
                    format_number(cutoff),
                    format_number(m.accuracy),
                    format_number(m.sensitivity),
                    format_number(m.specificity),
                    format_number(m.tp),
                    format_number(m.fp),
                    format_number(m.tn),
                    format_number(m.fn),
                    format_number(m.n_selected),
                    str(m.replicates_used),
                ]
            )
        )
    return ("\n".join(lines) + "\n").encode("ascii")


def study_text(result: StudyResult) -> str:
    """Aligned plain-text table of the study, one row per grid cell."""
    cfg = result.config
    head = (
        f"Outlier magnitude c = {format_number(cfg.c)}, "
        f"censoring bound = {format_number(cfg.censor_upper)}, "
        f"replicates used = {cfg.replicates - result.failures} of {cfg.replicates}\n"
        f"Mean clean-row censoring fraction: {result.mean_censoring:.3f}\n"
    )
    cols = (
        f"{'method':<10}{'cutoff':>8}{'TP':>8}{'FP':>8}{'TN':>8}{'FN':>8}"
        f"{'#Sel':>8}{'Acc':>8}{'Sens':>8}{'Spec':>8}"
    )
    rows = [head, cols]
    for method, cutoff, m in result.cells:
        rows.append(
            f"{method:<10}{cutoff:>8.2f}{m.tp:>8.1f}{m.fp:>8.1f}{m.tn:>8.1f}"
            f"{m.fn:>8.1f}{m.n_selected:>8.1f}{m.accuracy:>8.3f}"
            f"{m.sensitivity:>8.3f}{m.specificity:>8.3f}"
        )
    return "\n".join(rows) + "\n"
