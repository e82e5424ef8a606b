"""Weighted quantile regression with censoring-mass redistribution.

``solve_weighted_qr`` minimizes the weighted pinball objective exactly (see
``_pycore``/``_core`` for the simplex itself); ``fit_cqr`` builds the weights
from the local Kaplan-Meier CDF and solves.  Coefficients are reported on the
original covariate scale; kernel distances use the scaled space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from .data import Dataset
from .errors import (
    DimensionMismatch,
    PseudoPointUnstable,
    RankDeficientDesign,
    Unbounded,
)
from .kernelkm import (
    BandwidthConfig,
    KernelDiagnostics,
    RedistributionWeights,
    censored_cdf_values,
    redistribution_weights,
)

INTERCEPT = "(Intercept)"
PSEUDO_RETRIES = 3


def pinball_loss(u, tau: float):
    """rho_tau(u) = u * (tau - 1{u < 0}); accepts scalars or arrays."""
    if not 0.0 < tau < 1.0:
        raise ValueError("tau must be in (0, 1)")
    u_arr = np.asarray(u, dtype=float)
    out = u_arr * (tau - (u_arr < 0.0))
    return float(out) if np.ndim(u) == 0 else out


@dataclass(frozen=True)
class WeightedQRProblem:
    """A weighted pinball minimization with optional pseudo mass.

    Each observation i contributes a loss term of weight ``weights[i]`` at
    ``responses[i]``; whenever ``weights[i] < 1`` the remaining mass
    ``1 - weights[i]`` sits at the far-right pseudo response ``pseudo_value``.
    """

    design: np.ndarray
    responses: np.ndarray
    weights: np.ndarray
    tau: float
    pseudo_value: float | None
    column_names: tuple[str, ...]

    def __post_init__(self):
        design = np.ascontiguousarray(np.asarray(self.design, dtype=float))
        responses = np.ascontiguousarray(np.asarray(self.responses, dtype=float))
        weights = np.ascontiguousarray(np.asarray(self.weights, dtype=float))
        n = len(responses)
        if design.ndim != 2 or design.shape[0] != n or weights.shape != (n,):
            raise ValueError("design, responses, and weights disagree on shape")
        if not 0.0 < self.tau < 1.0:
            raise ValueError("tau must be in (0, 1)")
        if np.any(weights < 0.0) or np.any(weights > 1.0):
            raise ValueError("weights must lie in [0, 1]")
        if np.any(weights < 1.0) and self.pseudo_value is None:
            raise ValueError("pseudo_value required when some weight is below 1")
        object.__setattr__(self, "design", design)
        object.__setattr__(self, "responses", responses)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "column_names", tuple(self.column_names))

    @property
    def n_terms(self) -> int:
        """Number of loss terms after pseudo expansion."""
        return len(self.responses) + int(np.sum(self.weights < 1.0))

    def expanded(self, pseudo_value: float | None = None):
        """Materialize the term list: (design, response, weight, is_pseudo)."""
        pv = self.pseudo_value if pseudo_value is None else pseudo_value
        part = np.nonzero(self.weights < 1.0)[0]
        a = np.vstack([self.design, self.design[part]])
        z = np.concatenate([self.responses, np.full(part.size, pv if part.size else 0.0)])
        c = np.concatenate([self.weights, 1.0 - self.weights[part]])
        is_pseudo = np.zeros(len(z), dtype=bool)
        is_pseudo[len(self.responses):] = True
        return a, z, c, is_pseudo


@dataclass(frozen=True)
class QuantileFit:
    """A fitted conditional quantile line.

    ``beta`` is ordered (intercept, covariates...) on the original covariate
    scale.  ``objective`` is the attained weighted pinball sum over all terms
    including pseudo mass.  ``pseudo_value`` is None when every weight was 1.
    """

    tau: float
    beta: np.ndarray
    objective: float
    pseudo_value: float | None
    diagnostics: dict

    def predict(self, x) -> float:
        return predict_quantile(self, x)


def design_matrix(d: Dataset) -> np.ndarray:
    """Leading-1 design on the original covariate scale."""
    x = d.original_covariates()
    return np.hstack([np.ones((d.n, 1)), x])


def pseudo_response(values: np.ndarray) -> float:
    """Far-right finite stand-in for +infinity mass."""
    vmax = float(np.max(values))
    vmin = float(np.min(values))
    return vmax + 100.0 * (vmax - vmin) + 1.0


def assemble_problem(
    d: Dataset, tau: float, weights: RedistributionWeights | np.ndarray
) -> WeightedQRProblem:
    """Bundle dataset, level, and redistribution weights into a problem."""
    if isinstance(weights, RedistributionWeights):
        if abs(weights.tau - tau) > 1e-12:
            raise ValueError("weights were built for a different tau")
        w = weights.weights
    else:
        w = np.asarray(weights, dtype=float)
    if len(w) != d.n:
        raise ValueError("weights length must match the dataset")
    pv = pseudo_response(d.times) if np.any(w < 1.0) else None
    return WeightedQRProblem(
        design=design_matrix(d),
        responses=np.array(d.times, dtype=float),
        weights=w,
        tau=float(tau),
        pseudo_value=pv,
        column_names=(INTERCEPT, *d.covariate_names),
    )


def _check_column_rank(a: np.ndarray, names: tuple[str, ...]):
    """Sequential column-rank check; names the first dependent column."""
    n, m = a.shape
    norms = np.linalg.norm(a, axis=0)
    big = max(float(norms.max()) if m else 0.0, 1.0)
    q: list[np.ndarray] = []
    for j in range(m):
        v = a[:, j].astype(float)
        for e in q:
            v = v - (v @ e) * e
        nv = float(np.linalg.norm(v))
        if nv <= 1e-10 * big:
            detail = "fewer independent rows than columns" if n < m else ""
            raise RankDeficientDesign(names[j], detail)
        q.append(v / nv)


def solve_weighted_qr(problem: WeightedQRProblem) -> QuantileFit:
    """Exact, deterministic minimization of the weighted pinball objective.

    Pseudo terms must end strictly below the fitted line's value nowhere --
    i.e. ``pseudo_value - x.beta > 0`` for every pseudo row; if violated the
    pseudo response is inflated tenfold and the solve repeated, at most
    ``PSEUDO_RETRIES`` times.
    """
    pv = problem.pseudo_value
    total_iters = 0
    total_degen = 0
    for attempt in range(PSEUDO_RETRIES + 1):
        a, z, c, is_pseudo = problem.expanded(pv)
        keep = c > 0.0
        a_k, z_k, c_k = a[keep], z[keep], c[keep]
        if a_k.shape[0] < a_k.shape[1]:
            raise RankDeficientDesign(
                problem.column_names[0], "fewer positive-weight terms than columns"
            )
        _check_column_rank(a_k, problem.column_names)
        beta, objective, iters, degen, status = _backend.solve_wqr(
            a_k, z_k, c_k, problem.tau
        )
        total_iters += int(iters)
        total_degen += int(degen)
        if status == _backend.STATUS_RANK_DEFICIENT:
            raise RankDeficientDesign(problem.column_names[0], "no invertible basis found")
        if status in (_backend.STATUS_UNBOUNDED, _backend.STATUS_MAXITER):
            raise Unbounded(f"solver failed with internal status {status}")
        pseudo_k = is_pseudo[keep]
        if not np.any(pseudo_k):
            break
        margin = z_k[pseudo_k] - a_k[pseudo_k] @ beta
        if float(np.min(margin)) > 0.0:
            break
        if attempt == PSEUDO_RETRIES:
            raise PseudoPointUnstable(
                f"pseudo response never cleared the fitted line after "
                f"{PSEUDO_RETRIES} inflations"
            )
        pv = float(pv) * 10.0
    # The backends' running objectives can differ in the last ulp (loop vs
    # pairwise summation); recompute it here so the reported value -- and any
    # artifact serialized from it -- does not depend on which core solved.
    beta = np.asarray(beta, dtype=float)
    objective = float(np.sum(c_k * pinball_loss(z_k - a_k @ beta, problem.tau)))
    return QuantileFit(
        tau=problem.tau,
        beta=beta,
        objective=objective,
        pseudo_value=None if problem.pseudo_value is None else float(pv),
        diagnostics={
            "iterations": total_iters,
            "degenerate_pivots": total_degen,
            "neighborhood_fallbacks": 0,
            "degenerate_cdf": 0,
        },
    )


def fit_quantiles(
    d: Dataset,
    taus,
    bw: BandwidthConfig = BandwidthConfig(),
) -> dict[float, QuantileFit]:
    """Fit several quantile levels sharing one local-KM pass.

    The conditional CDF values at censored rows do not depend on tau, so they
    are computed once and reused for every level.
    """
    taus = [float(t) for t in taus]
    diag = KernelDiagnostics()
    f_values = censored_cdf_values(d, bw, diag)
    fits: dict[float, QuantileFit] = {}
    for tau in taus:
        tau_diag = KernelDiagnostics()
        rw = redistribution_weights(d, tau, f_values, bw, tau_diag)
        fit = solve_weighted_qr(assemble_problem(d, tau, rw))
        fit.diagnostics["neighborhood_fallbacks"] = diag.neighborhood_fallbacks
        fit.diagnostics["degenerate_cdf"] = tau_diag.degenerate_cdf
        fits[tau] = fit
    return fits


def fit_cqr(
    d: Dataset, tau: float, bw: BandwidthConfig = BandwidthConfig()
) -> QuantileFit:
    """Locally weighted censored quantile regression at a single level."""
    return fit_quantiles(d, [tau], bw)[float(tau)]


def predict_quantile(fit: QuantileFit, x) -> float:
    """Fitted quantile at a covariate point on the original scale."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if len(x) != len(fit.beta) - 1:
        raise DimensionMismatch(
            f"expected {len(fit.beta) - 1} covariate values, got {len(x)}"
        )
    return float(fit.beta[0] + x @ fit.beta[1:])


def predict_dataset(fit: QuantileFit, d: Dataset) -> np.ndarray:
    """Fitted quantile at every observation of a dataset."""
    if d.p != len(fit.beta) - 1:
        raise DimensionMismatch(
            f"fit has {len(fit.beta) - 1} covariates, dataset has {d.p}"
        )
    return design_matrix(d) @ fit.beta
