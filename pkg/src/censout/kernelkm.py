"""Kernel weights, local Kaplan-Meier CDF, and censoring-mass redistribution.

The conditional CDF of the survival time given covariates is estimated by a
product-limit curve whose case weights come from a Nadaraya-Watson smoother
with a biquadratic kernel.  Censored observations then receive a weight in
[0, 1] that splits their mass between the observed time and a far-right
pseudo point, depending on where the censoring falls relative to the target
quantile level.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from .data import Dataset

DEGENERATE_CDF_GUARD = 1.0 - 1e-12


@dataclass(frozen=True)
class BandwidthConfig:
    """Kernel bandwidth on the [0, 1]-scaled covariate space."""

    h: float = 0.05

    def __post_init__(self):
        if not (self.h > 0.0 and np.isfinite(self.h)):
            raise ValueError("bandwidth h must be a positive finite real")


@dataclass
class KernelDiagnostics:
    """Counters for guarded events during weight construction."""

    neighborhood_fallbacks: int = 0
    degenerate_cdf: int = 0


@dataclass(frozen=True)
class RedistributionWeights:
    """Per-observation weights w_i in [0, 1] and the tau they were built for."""

    tau: float
    weights: np.ndarray


def biquadratic_kernel(u):
    """(15/16) * (1 - u^2)^2 on |u| <= 1, zero outside."""
    u = np.asarray(u, dtype=float)
    scalar = u.ndim == 0
    u = np.atleast_1d(u)
    t = 1.0 - u * u
    out = np.where(np.abs(u) <= 1.0, 0.9375 * t * t, 0.0)
    return float(out[0]) if scalar else out


def nw_weights(
    x,
    d: Dataset,
    bw: BandwidthConfig = BandwidthConfig(),
    diag: KernelDiagnostics | None = None,
) -> np.ndarray:
    """Normalized kernel weights of every observation around the point ``x``.

    ``x`` lives in the same (scaled) covariate space as the stored data.  If
    no observation falls inside the bandwidth the weights fall back to the
    uniform 1/n and the event is counted in ``diag.neighborhood_fallbacks``.
    """
    if d.p >= 1 and d.scaling is None:
        raise ValueError("nw_weights requires scaled covariates; call scale_covariates first")
    x = np.asarray(x, dtype=float).reshape(-1)
    if len(x) != d.p:
        raise ValueError(f"query point has {len(x)} coordinates, dataset has p={d.p}")
    if d.p == 0:
        return np.full(d.n, 1.0 / d.n)
    dist = np.sqrt(np.sum((d.covariates - x) ** 2, axis=1))
    k = biquadratic_kernel(dist / bw.h)
    total = float(k.sum())
    if total <= 0.0:
        if diag is not None:
            diag.neighborhood_fallbacks += 1
        return np.full(d.n, 1.0 / d.n)
    return k / total


def _sorted_views(d: Dataset):
    """Time-sorted views plus first-index-of-tie-group, shared by KM code."""
    order = np.argsort(d.times, kind="stable")
    y = d.times[order]
    delta = d.status[order]
    new_group = np.empty(d.n, dtype=bool)
    new_group[0] = True
    new_group[1:] = y[1:] != y[:-1]
    starts = np.nonzero(new_group)[0]
    first = starts[np.cumsum(new_group) - 1].astype(np.int64)
    return order, y, delta, first


def _km_cdf_from_weights(b, order, y_sorted, delta_sorted, first, t):
    surv = _backend.km_survival(b[order], delta_sorted, first)
    pos = np.searchsorted(y_sorted, t, side="right") - 1
    if np.ndim(pos) == 0:
        return 0.0 if pos < 0 else 1.0 - float(surv[pos])
    out = np.where(pos >= 0, 1.0 - surv[np.maximum(pos, 0)], 0.0)
    return out


def local_km_cdf(
    t: float,
    x,
    d: Dataset,
    bw: BandwidthConfig = BandwidthConfig(),
    diag: KernelDiagnostics | None = None,
) -> float:
    """Kernel-weighted product-limit estimate of P(T <= t | X = x)."""
    b = nw_weights(x, d, bw, diag)
    order, y_sorted, delta_sorted, first = _sorted_views(d)
    return float(_km_cdf_from_weights(b, order, y_sorted, delta_sorted, first, float(t)))


def censored_cdf_values(
    d: Dataset,
    bw: BandwidthConfig = BandwidthConfig(),
    diag: KernelDiagnostics | None = None,
) -> np.ndarray:
    """F_hat(Y_i | X_i) for every censored observation, NaN at events.

    Weight vectors are computed once per distinct covariate point, so discrete
    covariates cost one curve per level rather than one per row.
    """
    out = np.full(d.n, np.nan)
    censored = np.nonzero(d.status == 0)[0]
    if censored.size == 0:
        return out
    order, y_sorted, delta_sorted, first = _sorted_views(d)
    if d.p == 0:
        groups = {(): censored}
    else:
        groups = {}
        for i in censored:
            groups.setdefault(tuple(d.covariates[i]), []).append(i)
    for x, members in groups.items():
        b = nw_weights(np.array(x, dtype=float), d, bw, diag)
        members = np.asarray(members)
        vals = _km_cdf_from_weights(
            b, order, y_sorted, delta_sorted, first, d.times[members]
        )
        out[members] = vals
    return out


def redistribution_weight(
    status: int,
    tau: float,
    f_at_obs: float,
    diag: KernelDiagnostics | None = None,
) -> float:
    """Weight kept at the observed time under redistribution-of-mass.

    Events always keep weight 1.  A censored observation keeps weight 1 when
    the estimated CDF at its censoring time is >= tau (it already lies above
    the quantile of interest) and otherwise keeps ``(tau - F) / (1 - F)``,
    sending the rest to the pseudo point.  F within 1e-12 of 1 is guarded to
    weight 1 and counted in ``diag.degenerate_cdf``.
    """
    if not 0.0 < tau < 1.0:
        raise ValueError("tau must be in (0, 1)")
    if status == 1:
        return 1.0
    f = float(f_at_obs)
    if f >= DEGENERATE_CDF_GUARD:
        if diag is not None:
            diag.degenerate_cdf += 1
        return 1.0
    if f >= tau:
        return 1.0
    return (tau - f) / (1.0 - f)


def redistribution_weights(
    d: Dataset,
    tau: float,
    f_values: np.ndarray | None = None,
    bw: BandwidthConfig = BandwidthConfig(),
    diag: KernelDiagnostics | None = None,
) -> RedistributionWeights:
    """Vector of redistribution weights for the whole dataset at level tau."""
    if f_values is None:
        f_values = censored_cdf_values(d, bw, diag)
    if len(f_values) != d.n:
        raise ValueError("f_values length must match the dataset")
    w = np.ones(d.n)
    for i in np.nonzero(d.status == 0)[0]:
        w[i] = redistribution_weight(0, tau, f_values[i], diag)
    return RedistributionWeights(tau=float(tau), weights=w)
