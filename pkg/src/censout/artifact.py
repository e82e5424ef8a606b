"""Persistent analysis artifacts: fits + detection, serialized as JSON.

Every float is stored as a decimal string with 17 significant digits, which
round-trips IEEE doubles exactly; the JSON layout is key-sorted and carries no
timestamps, so identical analyses produce identical bytes.  The artifact
remembers how the data file was loaded (columns, log flag, scaling bounds) and
its content hash, so a re-threshold can verify that nothing changed underneath
it before reusing the stored scores.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .data import Dataset, format_number, load_csv, log_transform, scale_covariates
from .detect import DetectionResult, DetectorConfig
from .errors import DataError, FingerprintMismatch
from .kernelkm import BandwidthConfig
from .solver import QuantileFit

ARTIFACT_VERSION = "0.1.0"


@dataclass(frozen=True)
class DataBinding:
    """Where the data came from and exactly how it was turned into a Dataset."""

    path: str
    sha256: str
    time_col: str
    status_col: str
    covariate_cols: tuple[str, ...]
    log_time: bool
    scaling: tuple[tuple[float, float], ...] | None


@dataclass(frozen=True)
class AnalysisArtifact:
    """Everything needed to re-threshold, re-plot, or re-report an analysis."""

    version: str
    data: DataBinding
    bandwidth: BandwidthConfig
    detector: DetectorConfig
    fits: dict[float, QuantileFit]
    detection: DetectionResult


def fingerprint_file(path) -> str:
    try:
        with open(path, "rb") as fh:
            return hashlib.sha256(fh.read()).hexdigest()
    except OSError as exc:
        raise DataError(f"cannot read data file {path}: {exc}") from exc


def bind_dataset(
    path,
    time_col: str,
    status_col: str,
    covariate_cols: tuple[str, ...],
    log_time: bool,
) -> tuple[Dataset, DataBinding]:
    """Load, optionally log-transform, and scale a CSV; record the recipe."""
    d = load_csv(path, time_col, status_col, covariate_cols)
    if log_time:
        d = log_transform(d)
    if d.p >= 1:
        d = scale_covariates(d)
    binding = DataBinding(
        path=str(path),
        sha256=fingerprint_file(path),
        time_col=time_col,
        status_col=status_col,
        covariate_cols=tuple(covariate_cols),
        log_time=bool(log_time),
        scaling=d.scaling,
    )
    return d, binding


def reload_dataset(binding: DataBinding) -> Dataset:
    """Rebuild the Dataset behind an artifact, verifying the content hash."""
    digest = fingerprint_file(binding.path)
    if digest != binding.sha256:
        raise FingerprintMismatch(
            f"data file {binding.path} changed since the artifact was written "
            f"(hash {digest[:12]}… != {binding.sha256[:12]}…)"
        )
    d = load_csv(
        binding.path, binding.time_col, binding.status_col, binding.covariate_cols
    )
    if binding.log_time:
        d = log_transform(d)
    if d.p >= 1:
        d = scale_covariates(d, bounds=binding.scaling)
    return d


def _num(x) -> str | None:
    return None if x is None else format_number(float(x))


def _encode_info(info: dict) -> dict:
    out = {}
    for key, value in info.items():
        if isinstance(value, bool) or value is None or isinstance(value, str):
            out[key] = value
        else:
            out[key] = _num(value)
    return out


def _decode_info(info: dict) -> dict:
    out = {}
    for key, value in info.items():
        out[key] = float(value) if isinstance(value, str) else value
    return out


def _encode_fit(fit: QuantileFit) -> dict:
    return {
        "beta": [_num(b) for b in fit.beta],
        "objective": _num(fit.objective),
        "pseudo_value": _num(fit.pseudo_value),
        "diagnostics": {k: int(v) for k, v in sorted(fit.diagnostics.items())},
    }


def _decode_fit(tau: float, blob: dict) -> QuantileFit:
    pv = blob.get("pseudo_value")
    return QuantileFit(
        tau=tau,
        beta=np.array([float(b) for b in blob["beta"]], dtype=float),
        objective=float(blob["objective"]),
        pseudo_value=None if pv is None else float(pv),
        diagnostics=dict(blob.get("diagnostics", {})),
    )


def artifact_to_json(art: AnalysisArtifact) -> bytes:
    det = art.detection
    payload = {
        "version": art.version,
        "data": {
            "path": art.data.path,
            "sha256": art.data.sha256,
            "time_col": art.data.time_col,
            "status_col": art.data.status_col,
            "covariate_cols": list(art.data.covariate_cols),
            "log_time": art.data.log_time,
            "scaling": None
            if art.data.scaling is None
            else [[_num(lo), _num(hi)] for lo, hi in art.data.scaling],
        },
        "bandwidth": {"h": _num(art.bandwidth.h)},
        "detector": {
            "method": art.detector.method,
            "k_r": _num(art.detector.k_r),
            "k_b": _num(art.detector.k_b),
            "k_s": _num(art.detector.k_s),
            "p_ref": _num(art.detector.p_ref),
        },
        "fits": {repr(float(tau)): _encode_fit(fit) for tau, fit in art.fits.items()},
        "detection": {
            "method": det.method,
            "flags": [bool(f) for f in det.flags],
            "evidence": [_num(e) for e in det.evidence],
            "cutoff_info": _encode_info(det.cutoff_info),
            "n_outliers": det.n_outliers,
            "clamped": list(det.clamped),
            "statuses": None
            if det.statuses is None
            else [int(s) for s in det.statuses],
        },
    }
    text = json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=True)
    return (text + "\n").encode("ascii")


def artifact_from_json(raw: bytes) -> AnalysisArtifact:
    try:
        payload = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DataError(f"artifact is not valid JSON: {exc}") from exc
    try:
        data = payload["data"]
        binding = DataBinding(
            path=data["path"],
            sha256=data["sha256"],
            time_col=data["time_col"],
            status_col=data["status_col"],
            covariate_cols=tuple(data["covariate_cols"]),
            log_time=bool(data["log_time"]),
            scaling=None
            if data["scaling"] is None
            else tuple((float(lo), float(hi)) for lo, hi in data["scaling"]),
        )
        det_blob = payload["detector"]
        ks = det_blob["k_s"]
        detector = DetectorConfig(
            method=det_blob["method"],
            k_r=float(det_blob["k_r"]),
            k_b=float(det_blob["k_b"]),
            k_s=None if ks is None else float(ks),
            p_ref=float(det_blob["p_ref"]),
        )
        fits = {
            float(tau): _decode_fit(float(tau), blob)
            for tau, blob in payload["fits"].items()
        }
        dd = payload["detection"]
        detection = DetectionResult(
            method=dd["method"],
            flags=np.array(dd["flags"], dtype=bool),
            evidence=np.array([float(e) for e in dd["evidence"]], dtype=float),
            cutoff_info=_decode_info(dd["cutoff_info"]),
            clamped=tuple(int(i) for i in dd["clamped"]),
            statuses=None
            if dd["statuses"] is None
            else np.array(dd["statuses"], dtype=np.int8),
        )
        return AnalysisArtifact(
            version=payload["version"],
            data=binding,
            bandwidth=BandwidthConfig(h=float(payload["bandwidth"]["h"])),
            detector=detector,
            fits=fits,
            detection=detection,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"artifact is missing or corrupts a field: {exc}") from exc


def save_artifact(art: AnalysisArtifact, path) -> bytes:
    raw = artifact_to_json(art)
    with open(path, "wb") as fh:
        fh.write(raw)
    return raw


def load_artifact(path) -> AnalysisArtifact:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise DataError(f"cannot read artifact {path}: {exc}") from exc
    return artifact_from_json(raw)
