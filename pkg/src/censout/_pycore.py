"""Pure NumPy implementation of the numerical kernels.

Two kernels live here (and, mirrored, in the compiled extension ``_core``):

* ``solve_wqr`` -- exact minimizer of the weighted pinball objective
  ``sum_i c_i * rho_tau(z_i - a_i . beta)`` via a condensed simplex on the
  vertex form of the equivalent linear program.  A vertex interpolates m
  rows (m = number of columns); iterations move along edges chosen by a
  least-index (Bland) rule, with zero-step pivots through degenerate
  vertices, so the method terminates and is deterministic for identical
  input.

* ``km_survival`` -- weighted product-limit survival curve over a sample
  sorted by time, sharing the at-risk mass within tied times.
"""

from __future__ import annotations

import numpy as np

NAME = "pure"

STATUS_OK = 0
STATUS_RANK_DEFICIENT = 1
STATUS_UNBOUNDED = 2
STATUS_MAXITER = 3

_BASIS_TOL = 1e-10  # relative pivot tolerance for basis construction
_OPT_TOL = 1e-9  # slack on the dual-feasibility interval [tau-1, tau]
_PIVOT_TOL = 1e-12  # minimum |a_i . u| to accept a pivot


def _initial_basis(A: np.ndarray) -> np.ndarray | None:
    """Greedy least-index selection of m linearly independent rows."""
    n, m = A.shape
    chosen: list[int] = []
    q = np.zeros((m, m))
    k = 0
    for i in range(n):
        v = A[i].astype(float)
        norm0 = np.linalg.norm(v)
        for t in range(k):
            v = v - (v @ q[t]) * q[t]
        norm1 = np.linalg.norm(v)
        if norm1 > _BASIS_TOL * max(1.0, norm0):
            q[k] = v / norm1
            chosen.append(i)
            k += 1
            if k == m:
                return np.array(chosen, dtype=np.int64)
    return None


def _pinball(u: np.ndarray, tau: float) -> np.ndarray:
    return u * (tau - (u < 0.0))


def solve_wqr(A, z, c, tau, max_iter=0):
    """Minimize ``sum c_i rho_tau(z_i - a_i . beta)`` exactly.

    Parameters are the dense design (n x m), responses (n), strictly positive
    case weights (n), and the quantile level.  Returns
    ``(beta, objective, iterations, degenerate_pivots, status)``.
    """
    A = np.ascontiguousarray(A, dtype=float)
    z = np.ascontiguousarray(z, dtype=float)
    c = np.ascontiguousarray(c, dtype=float)
    n, m = A.shape
    if max_iter <= 0:
        max_iter = 100 * (n + m + 10)

    basis = _initial_basis(A)
    if basis is None:
        return np.zeros(m), 0.0, 0, 0, STATUS_RANK_DEFICIENT

    zscale = max(1.0, float(np.max(np.abs(z))))
    tol_zero = 1e-11 * zscale
    cmax = float(np.max(c))
    tol_slope = 1e-12 * max(1.0, cmax)

    iters = 0
    degen = 0
    status = STATUS_OK
    beta = np.zeros(m)
    resid = np.zeros(n)
    # Which branch of its kink a zero-residual nonbasic row is parked on
    # (+1: treated as an upward residual, -1: downward).  Rows with nonzero
    # residuals are forced to the matching side every iteration; parked sides
    # persist across pivots, which is what makes Bland's rule terminate.
    side = np.ones(n, dtype=np.int8)

    while True:
        AB = A[basis]
        beta = np.linalg.solve(AB, z[basis])
        resid = z - A @ beta
        resid[basis] = 0.0

        nonbasic = np.ones(n, dtype=bool)
        nonbasic[basis] = False
        side[nonbasic & (resid > tol_zero)] = 1
        side[nonbasic & (resid < -tol_zero)] = -1
        zer = nonbasic & (resid <= tol_zero) & (resid >= -tol_zero)

        gamma = np.zeros(n)
        gamma[nonbasic] = np.where(side[nonbasic] > 0, tau, tau - 1.0)
        grad = (c * gamma) @ A

        d = np.linalg.solve(AB.T, -grad)
        gb = d / c[basis]
        viol = np.maximum(gb - tau, (tau - 1.0) - gb)
        if float(np.max(viol)) <= _OPT_TOL:
            break

        # Bland: smallest original row index among violating basic rows.
        cand = np.nonzero(viol > _OPT_TOL)[0]
        k_star = int(cand[np.argmin(basis[cand])])
        h_star = int(basis[k_star])
        s = -1.0 if gb[k_star] > tau else 1.0

        e = np.zeros(m)
        e[k_star] = 1.0
        u = np.linalg.solve(AB, e)
        w = s * (A @ u)
        w[basis] = 0.0  # basic rows do not cross; h_star's kink is in the slope

        # One-sided derivative along beta + t*s*u at t = 0+.  grad counts a
        # parked row on its stored side; when the move bends it around its
        # kink the true slope differs from that by exactly c*|w|.
        slope = s * d[k_star] + c[h_star] * ((1.0 - tau) if s > 0 else tau)
        bend = zer & ((side > 0) & (w > 0.0) | (side < 0) & (w < 0.0))
        if np.any(bend):
            slope += float(np.sum(c[bend] * np.abs(w[bend])))

        if slope >= -tol_slope:
            # Blocked by a degenerate vertex: exchange bases without moving.
            # Eligible rows are the parked ones the move would bend; taking
            # the smallest index keeps the exchange sequence finite.
            blockers = np.nonzero(
                zer
                & (((side > 0) & (w > _PIVOT_TOL)) | ((side < 0) & (w < -_PIVOT_TOL)))
            )[0]
            if blockers.size == 0:
                break  # certificate failure was numerical noise; accept vertex
            basis[k_star] = int(blockers[0])
            side[h_star] = 1 if s < 0 else -1  # the row leaves parked at zero
            degen += 1
            iters += 1
            if iters > max_iter:
                status = STATUS_MAXITER
                break
            continue

        crossing = nonbasic & (((resid > tol_zero) & (w > _PIVOT_TOL))
                               | ((resid < -tol_zero) & (w < -_PIVOT_TOL)))
        idx = np.nonzero(crossing)[0]
        if idx.size == 0:
            status = STATUS_UNBOUNDED
            break
        t = resid[idx] / w[idx]
        order = np.lexsort((idx, t))
        gains = np.cumsum(c[idx[order]] * np.abs(w[idx[order]]))
        stop = int(np.searchsorted(gains, -slope, side="left"))
        if stop >= idx.size:
            status = STATUS_UNBOUNDED
            break
        basis[k_star] = int(idx[order[stop]])
        side[h_star] = 1 if s < 0 else -1  # departing residual has sign -s
        iters += 1
        if iters > max_iter:
            status = STATUS_MAXITER
            break

    objective = float(np.sum(c * _pinball(resid, tau)))
    return beta, objective, iters, degen, status


def km_survival(b_sorted, delta_sorted, group_first):
    """Product-limit survival values after each position of a time-sorted sample.

    ``b_sorted`` are nonnegative case weights in time order, ``delta_sorted``
    the event indicators, and ``group_first[j]`` the first index of j's tied
    time group.  Censored positions contribute factor 1; an event at position
    j contributes ``1 - b_j / S_j`` with ``S_j`` the total weight at risk
    (all positions with time >= the group's time).
    """
    b = np.ascontiguousarray(b_sorted, dtype=float)
    delta = np.ascontiguousarray(delta_sorted, dtype=np.int8)
    first = np.ascontiguousarray(group_first, dtype=np.int64)
    suffix = np.cumsum(b[::-1])[::-1]
    at_risk = suffix[first]
    factors = np.ones(len(b))
    ev = delta == 1
    denom = np.where(at_risk[ev] > 0.0, at_risk[ev], 1.0)
    factors[ev] = np.where(at_risk[ev] > 0.0, 1.0 - b[ev] / denom, 1.0)
    return np.cumprod(factors)
