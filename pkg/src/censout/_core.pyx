# cython: language_level=3
"""Compiled implementation of the numerical kernels.

Mirrors ``_pycore`` operation for operation -- same tolerances, same
least-index tie-breaking, same degenerate-pivot handling -- with the O(n)
inner loops (residuals, gradient, direction products, breakpoint walk) run as
C loops instead of allocating temporaries.  The small m x m linear solves and
the breakpoint sort still go through NumPy, so both backends follow identical
pivot sequences on identical input.
"""

import numpy as np

cimport cython
cimport numpy as cnp

cnp.import_array()

NAME = "compiled"

STATUS_OK = 0
STATUS_RANK_DEFICIENT = 1
STATUS_UNBOUNDED = 2
STATUS_MAXITER = 3

cdef double _BASIS_TOL = 1e-10
cdef double _OPT_TOL = 1e-9
cdef double _PIVOT_TOL = 1e-12


@cython.boundscheck(False)
@cython.wraparound(False)
cdef object _initial_basis(double[:, ::1] a):
    """Greedy least-index selection of m linearly independent rows."""
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t m = a.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] q_arr = np.zeros((m, m))
    cdef double[:, ::1] q = q_arr
    cdef cnp.ndarray[cnp.float64_t, ndim=1] v_arr = np.zeros(m)
    cdef double[::1] v = v_arr
    cdef cnp.ndarray[cnp.int64_t, ndim=1] chosen = np.zeros(m, dtype=np.int64)
    cdef Py_ssize_t i, j, t, k = 0
    cdef double norm0, norm1, dot
    for i in range(n):
        norm0 = 0.0
        for j in range(m):
            v[j] = a[i, j]
            norm0 += v[j] * v[j]
        norm0 = norm0 ** 0.5
        for t in range(k):
            dot = 0.0
            for j in range(m):
                dot += v[j] * q[t, j]
            for j in range(m):
                v[j] = v[j] - dot * q[t, j]
        norm1 = 0.0
        for j in range(m):
            norm1 += v[j] * v[j]
        norm1 = norm1 ** 0.5
        if norm1 > _BASIS_TOL * (1.0 if norm0 < 1.0 else norm0):
            for j in range(m):
                q[k, j] = v[j] / norm1
            chosen[k] = i
            k += 1
            if k == m:
                return chosen
    return None


@cython.boundscheck(False)
@cython.wraparound(False)
def solve_wqr(A, z, c, tau, max_iter=0):
    """Minimize ``sum c_i rho_tau(z_i - a_i . beta)`` exactly.

    Same contract as the pure backend: returns ``(beta, objective,
    iterations, degenerate_pivots, status)``.
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=2] a_arr = np.ascontiguousarray(A, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] z_arr = np.ascontiguousarray(z, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] c_arr = np.ascontiguousarray(c, dtype=np.float64)
    cdef double[:, ::1] a = a_arr
    cdef double[::1] zv = z_arr
    cdef double[::1] cv = c_arr
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t m = a.shape[1]
    cdef double tau_c = float(tau)
    cdef long long limit = int(max_iter)
    if limit <= 0:
        limit = 100 * (n + m + 10)

    basis_obj = _initial_basis(a)
    if basis_obj is None:
        return np.zeros(m), 0.0, 0, 0, STATUS_RANK_DEFICIENT
    cdef cnp.ndarray[cnp.int64_t, ndim=1] basis = basis_obj
    cdef cnp.int64_t[::1] bview = basis

    cdef double zscale = 1.0, cmax = 0.0, av
    cdef Py_ssize_t i, j, k
    for i in range(n):
        av = zv[i] if zv[i] >= 0.0 else -zv[i]
        if av > zscale:
            zscale = av
        if cv[i] > cmax:
            cmax = cv[i]
    cdef double tol_zero = 1e-11 * zscale
    cdef double tol_slope = 1e-12 * (1.0 if cmax < 1.0 else cmax)

    cdef long long iters = 0, degen = 0
    cdef int status = STATUS_OK

    cdef cnp.ndarray[cnp.float64_t, ndim=1] resid_arr = np.zeros(n)
    cdef double[::1] resid = resid_arr
    cdef cnp.ndarray[cnp.float64_t, ndim=1] grad_arr = np.zeros(m)
    cdef double[::1] grad = grad_arr
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w_arr = np.zeros(n)
    cdef double[::1] w = w_arr
    cdef cnp.ndarray[cnp.int8_t, ndim=1] cls_arr = np.zeros(n, dtype=np.int8)
    cdef cnp.int8_t[::1] cls = cls_arr  # 1 pos, -1 neg, 0 on the vertex
    # Which branch of its kink a zero-residual nonbasic row is parked on;
    # persists across pivots, which is what makes Bland's rule terminate.
    cdef cnp.ndarray[cnp.int8_t, ndim=1] side_arr = np.ones(n, dtype=np.int8)
    cdef cnp.int8_t[::1] side = side_arr
    cdef cnp.ndarray[cnp.int8_t, ndim=1] isb_arr = np.zeros(n, dtype=np.int8)
    cdef cnp.int8_t[::1] isb = isb_arr
    cdef cnp.ndarray[cnp.int64_t, ndim=1] cross_idx_arr = np.zeros(n, dtype=np.int64)
    cdef cnp.int64_t[::1] cross_idx = cross_idx_arr
    cdef cnp.ndarray[cnp.float64_t, ndim=1] cross_t_arr = np.zeros(n)
    cdef double[::1] cross_t = cross_t_arr

    cdef cnp.ndarray[cnp.float64_t, ndim=1] beta_arr = np.zeros(m)
    cdef double[::1] beta
    cdef double[::1] d
    cdef double[::1] u
    cdef double gamma_i, dot, gb, viol, slope, s, acc, target
    cdef Py_ssize_t k_star, h_star, best_row, n_cross, stop
    cdef long long order_pos

    while True:
        ab = a_arr[basis]
        beta_arr = np.linalg.solve(ab, z_arr[basis])
        beta = beta_arr

        for i in range(n):
            isb[i] = 0
        for j in range(m):
            isb[bview[j]] = 1
        for i in range(n):
            if isb[i]:
                resid[i] = 0.0
                cls[i] = 0
                continue
            dot = 0.0
            for j in range(m):
                dot += a[i, j] * beta[j]
            resid[i] = zv[i] - dot
            if resid[i] > tol_zero:
                cls[i] = 1
                side[i] = 1
            elif resid[i] < -tol_zero:
                cls[i] = -1
                side[i] = -1
            else:
                cls[i] = 0

        for j in range(m):
            grad[j] = 0.0
        for i in range(n):
            if isb[i]:
                continue
            gamma_i = tau_c if side[i] > 0 else tau_c - 1.0
            gamma_i *= cv[i]
            for j in range(m):
                grad[j] += gamma_i * a[i, j]

        d_arr = np.linalg.solve(ab.T, -grad_arr)
        d = d_arr

        k_star = -1
        best_row = -1
        for j in range(m):
            gb = d[j] / cv[bview[j]]
            viol = gb - tau_c
            if (tau_c - 1.0) - gb > viol:
                viol = (tau_c - 1.0) - gb
            if viol > _OPT_TOL:
                # Bland: smallest original row index among violators.
                if best_row < 0 or bview[j] < best_row:
                    best_row = bview[j]
                    k_star = j
        if k_star < 0:
            break
        h_star = bview[k_star]
        s = -1.0 if d[k_star] / cv[h_star] > tau_c else 1.0

        e_arr = np.zeros(m)
        e_arr[k_star] = 1.0
        u_arr = np.linalg.solve(ab, e_arr)
        u = u_arr

        for i in range(n):
            if isb[i]:
                w[i] = 0.0
                continue
            dot = 0.0
            for j in range(m):
                dot += a[i, j] * u[j]
            w[i] = s * dot

        # One-sided derivative at t = 0+; grad counts a parked row on its
        # stored side, and when the move bends it around its kink the true
        # slope differs from that by exactly c*|w|.
        slope = s * d[k_star] + cv[h_star] * ((1.0 - tau_c) if s > 0.0 else tau_c)
        for i in range(n):
            if isb[i] or cls[i] != 0:
                continue
            if (side[i] > 0 and w[i] > 0.0) or (side[i] < 0 and w[i] < 0.0):
                slope += cv[i] * (w[i] if w[i] >= 0.0 else -w[i])

        if slope >= -tol_slope:
            # Blocked: exchange bases without moving.  Eligible rows are the
            # parked ones the move would bend; the smallest index keeps the
            # exchange sequence finite.
            best_row = -1
            for i in range(n):
                if isb[i] or cls[i] != 0:
                    continue
                if (side[i] > 0 and w[i] > _PIVOT_TOL) or (side[i] < 0 and w[i] < -_PIVOT_TOL):
                    best_row = i
                    break
            if best_row < 0:
                break
            bview[k_star] = best_row
            side[h_star] = 1 if s < 0.0 else -1  # the row leaves parked at zero
            degen += 1
            iters += 1
            if iters > limit:
                status = STATUS_MAXITER
                break
            continue

        n_cross = 0
        for i in range(n):
            if isb[i]:
                continue
            if (cls[i] == 1 and w[i] > _PIVOT_TOL) or (cls[i] == -1 and w[i] < -_PIVOT_TOL):
                cross_idx[n_cross] = i
                cross_t[n_cross] = resid[i] / w[i]
                n_cross += 1
        if n_cross == 0:
            status = STATUS_UNBOUNDED
            break

        order = np.lexsort((cross_idx_arr[:n_cross], cross_t_arr[:n_cross]))
        target = -slope
        acc = 0.0
        stop = -1
        for k in range(n_cross):
            order_pos = order[k]
            i = cross_idx[order_pos]
            av = w[i] if w[i] >= 0.0 else -w[i]
            acc += cv[i] * av
            if acc >= target:
                stop = k
                break
        if stop < 0:
            status = STATUS_UNBOUNDED
            break
        bview[k_star] = cross_idx[order[stop]]
        side[h_star] = 1 if s < 0.0 else -1  # departing residual has sign -s
        iters += 1
        if iters > limit:
            status = STATUS_MAXITER
            break

    cdef double objective = 0.0, r
    for i in range(n):
        r = resid[i]
        objective += cv[i] * (r * (tau_c - (1.0 if r < 0.0 else 0.0)))
    return beta_arr, objective, int(iters), int(degen), status


@cython.boundscheck(False)
@cython.wraparound(False)
def km_survival(b_sorted, delta_sorted, group_first):
    """Product-limit survival values after each position of a time-sorted sample.

    Same contract as the pure backend; censored positions contribute factor 1
    and tied times share the at-risk mass of their group.
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=1] b_arr = np.ascontiguousarray(b_sorted, dtype=np.float64)
    cdef cnp.ndarray[cnp.int8_t, ndim=1] d_arr = np.ascontiguousarray(delta_sorted, dtype=np.int8)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] f_arr = np.ascontiguousarray(group_first, dtype=np.int64)
    cdef double[::1] b = b_arr
    cdef cnp.int8_t[::1] delta = d_arr
    cdef cnp.int64_t[::1] first = f_arr
    cdef Py_ssize_t n = b.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out_arr = np.ones(n)
    cdef double[::1] out = out_arr
    cdef cnp.ndarray[cnp.float64_t, ndim=1] suffix_arr = np.zeros(n)
    cdef double[::1] suffix = suffix_arr
    cdef Py_ssize_t i
    cdef double acc = 0.0, at_risk, factor, running = 1.0
    for i in range(n - 1, -1, -1):
        acc += b[i]
        suffix[i] = acc
    for i in range(n):
        factor = 1.0
        if delta[i] == 1:
            at_risk = suffix[first[i]]
            if at_risk > 0.0:
                factor = 1.0 - b[i] / at_risk
        running *= factor
        out[i] = running
    return out_arr
