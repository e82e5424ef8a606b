"""Command-line interface.

Subcommands: ``detect`` (fit + flag + report + artifact), ``update``
(re-threshold a scoring artifact without refitting), ``simulate`` (Monte Carlo
metric tables), ``coef`` (five-level coefficient table from an artifact), and
``plot`` (normal QQ plot of stored scores as SVG).

Exit codes: 0 success, 2 usage problems, 3 data problems, 4 numerical
failures.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import __version__
from .artifact import (
    AnalysisArtifact,
    bind_dataset,
    load_artifact,
    reload_dataset,
    save_artifact,
)
from .data import Dataset
from .detect import (
    METHODS,
    REQUIRED_TAUS,
    DetectionResult,
    DetectorConfig,
    detect_score,
    run_detection,
)
from .errors import DataError, NumericalError, UsageError, WrongMethod
from .kernelkm import BandwidthConfig
from .report import COEF_LEVELS, coef_table, render_report
from .simulate import SimConfig, run_study, study_csv, study_text
from .solver import fit_quantiles
from .svgplot import qq_plot_svg

ARTIFACT_NAME = "artifact.json"
REPORT_NAME = "report.txt"
PLOT_NAME = "scores.svg"


def _write_text(path, text: str):
    with open(path, "wb") as fh:
        fh.write(text.encode("utf-8"))


def _emit_outputs(
    out_dir: str, art: AnalysisArtifact, d: Dataset, result: DetectionResult
) -> str:
    os.makedirs(out_dir, exist_ok=True)
    save_artifact(art, os.path.join(out_dir, ARTIFACT_NAME))
    report = render_report(os.path.basename(art.data.path), d, result)
    _write_text(os.path.join(out_dir, REPORT_NAME), report)
    if result.method == "score":
        qq_plot_svg(
            result.evidence,
            d.status,
            art.detector.k_s,
            os.path.join(out_dir, PLOT_NAME),
        )
    return report


def _configs(args) -> tuple[BandwidthConfig, DetectorConfig]:
    try:
        bw = BandwidthConfig(h=args.h)
        cfg = DetectorConfig(
            method=args.method, k_r=args.k_r, k_b=args.k_b, k_s=args.k_s
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return bw, cfg


def cmd_detect(args) -> int:
    bw, cfg = _configs(args)
    covariates = tuple(c.strip() for c in args.covariates.split(",") if c.strip())
    d, binding = bind_dataset(
        args.data, args.time_col, args.status_col, covariates, args.log_time
    )
    taus = set(REQUIRED_TAUS[cfg.method])
    if not args.fast:
        taus.update(COEF_LEVELS)
    fits = fit_quantiles(d, sorted(taus), bw)
    result = run_detection(d, fits, cfg)
    art = AnalysisArtifact(
        version=__version__,
        data=binding,
        bandwidth=bw,
        detector=cfg,
        fits=fits,
        detection=result,
    )
    report = _emit_outputs(args.out, art, d, result)
    sys.stdout.write(report)
    return 0


def cmd_update(args) -> int:
    art = load_artifact(args.artifact)
    if art.detection.method != "score":
        raise WrongMethod(
            f"artifact was built with the {art.detection.method!r} method; "
            "update re-thresholds scoring artifacts only"
        )
    try:
        cfg = DetectorConfig(
            method="score",
            k_r=art.detector.k_r,
            k_b=art.detector.k_b,
            k_s=args.k_s,
            p_ref=art.detector.p_ref,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    d = reload_dataset(art.data)
    result = detect_score(
        art.detection.evidence,
        cfg,
        statuses=d.status,
        clamped=art.detection.clamped,
    )
    new_art = AnalysisArtifact(
        version=art.version,
        data=art.data,
        bandwidth=art.bandwidth,
        detector=cfg,
        fits=art.fits,
        detection=result,
    )
    out_dir = args.out if args.out else (os.path.dirname(args.artifact) or ".")
    report = _emit_outputs(out_dir, new_art, d, result)
    sys.stdout.write(report)
    return 0


def cmd_simulate(args) -> int:
    cutoffs = {"residual": args.k_r, "boxplot": args.k_b, "score": args.k_s}
    cutoff = cutoffs[args.method]
    if cutoff is None:
        raise UsageError("--k-s is required when simulating the scoring method")
    try:
        cfg = SimConfig(
            c=args.c,
            censor_upper=args.censor_upper,
            replicates=args.replicates,
            seed=args.seed,
            detector_grid=((args.method, float(cutoff)),),
            bandwidth=BandwidthConfig(h=args.h),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    workers = args.workers if args.workers is not None else (os.cpu_count() or 1)
    result = run_study(cfg, workers=workers)
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "study.csv"), "wb") as fh:
        fh.write(study_csv(result))
    text = study_text(result)
    _write_text(os.path.join(args.out, "study.txt"), text)
    sys.stdout.write(text)
    return 0


def cmd_coef(args) -> int:
    art = load_artifact(args.artifact)
    sys.stdout.write(coef_table(art.fits, art.data.covariate_cols))
    return 0


def cmd_plot(args) -> int:
    art = load_artifact(args.artifact)
    if art.detection.method != "score":
        raise WrongMethod(
            f"artifact was built with the {art.detection.method!r} method; "
            "plot draws stored scores only"
        )
    k_s = args.k_s if args.k_s is not None else art.detector.k_s
    statuses = art.detection.statuses
    if statuses is None:
        statuses = reload_dataset(art.data).status
    out = args.out
    if out is None:
        out = os.path.join(os.path.dirname(args.artifact) or ".", PLOT_NAME)
    qq_plot_svg(art.detection.evidence, statuses, k_s, out)
    sys.stdout.write(f"wrote {out}\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="censout",
        description=(
            "Detect unusually large responses in right-censored data via "
            "locally weighted censored quantile regression."
        ),
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    pd = sub.add_parser("detect", help="fit quantiles, flag outliers, write artifacts")
    pd.add_argument("--data", required=True, help="input CSV path")
    pd.add_argument("--time-col", required=True, help="response column name")
    pd.add_argument("--status-col", required=True, help="event indicator column (1=event, 0=censored)")
    pd.add_argument("--covariates", default="", help="comma-separated covariate column names")
    pd.add_argument("--log-time", action="store_true", help="analyze the natural log of the response")
    pd.add_argument("--method", choices=METHODS, default="score")
    pd.add_argument("--k-r", type=float, default=1.5, help="residual cut-off multiplier")
    pd.add_argument("--k-b", type=float, default=1.5, help="upper-fence multiplier")
    pd.add_argument("--k-s", type=float, default=None, help="score cut-off (omit to defer)")
    pd.add_argument("--h", type=float, default=0.05, help="kernel bandwidth on scaled covariates")
    pd.add_argument("--fast", action="store_true", help="fit only the levels the method needs")
    pd.add_argument("--out", default="censout-out", help="output directory")
    pd.set_defaults(func=cmd_detect)

    pu = sub.add_parser("update", help="re-threshold a scoring artifact without refitting")
    pu.add_argument("--artifact", required=True, help="path to artifact.json")
    pu.add_argument("--k-s", type=float, required=True, help="new score cut-off")
    pu.add_argument("--out", default=None, help="output directory (default: alongside the artifact)")
    pu.set_defaults(func=cmd_update)

    ps = sub.add_parser("simulate", help="Monte Carlo detector metrics on synthetic data")
    ps.add_argument("--c", type=float, default=3.0, help="outlier shift in local-noise units")
    ps.add_argument("--censor-upper", type=float, default=40.0, help="upper bound of the uniform censoring draw")
    ps.add_argument("--method", choices=METHODS, default="score")
    ps.add_argument("--k-r", type=float, default=1.5)
    ps.add_argument("--k-b", type=float, default=1.5)
    ps.add_argument("--k-s", type=float, default=None)
    ps.add_argument("--replicates", type=int, default=100)
    ps.add_argument("--seed", type=int, default=0)
    ps.add_argument("--h", type=float, default=0.05)
    ps.add_argument("--workers", type=int, default=None, help="parallel replicate processes (default: CPU count)")
    ps.add_argument("--out", default="censout-sim", help="output directory")
    ps.set_defaults(func=cmd_simulate)

    pc = sub.add_parser("coef", help="print the five-level coefficient table")
    pc.add_argument("--artifact", required=True, help="path to artifact.json")
    pc.set_defaults(func=cmd_coef)

    pp = sub.add_parser("plot", help="render the QQ plot of stored scores")
    pp.add_argument("--artifact", required=True, help="path to artifact.json")
    pp.add_argument("--k-s", type=float, default=None, help="threshold line (default: the stored cut-off)")
    pp.add_argument("--out", default=None, help="output SVG path")
    pp.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"censout: error: {exc}\n")
        return 2
    except DataError as exc:
        sys.stderr.write(f"censout: data error: {exc}\n")
        return 3
    except NumericalError as exc:
        sys.stderr.write(f"censout: numerical error: {exc}\n")
        return 4


if __name__ == "__main__":
    raise SystemExit(main())
