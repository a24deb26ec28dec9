"""Numeric hot kernels: two-phase simplex and row-reduction rank.

Each kernel is written once, in numba-compatible vectorized numpy, and
compiled according to ``_backend``. The undecorated ``*_impl`` functions
stay importable for backend-parity tests and benchmarks.

Status codes returned by the simplex kernel:

* 0 — optimal
* 1 — infeasible (phase-1 optimum above tolerance)
* 2 — unbounded
* 4 — internal failure (iteration cap or impossible pivot state)
"""

import numpy as np

from ._backend import jit

LP_STATUS_OPTIMAL = 0
LP_STATUS_INFEASIBLE = 1
LP_STATUS_UNBOUNDED = 2
LP_STATUS_FAILED = 4


def _simplex_two_phase_impl(a_eq, b_eq, c, eps, max_iter):
    """Minimize c.T x subject to a_eq x = b_eq, x >= 0.

    Deterministic Bland pivoting: entering column is the lowest improving
    index, leaving row breaks exact ratio ties on the lowest basis index.
    Returns (status, x).
    """
    m, n = a_eq.shape
    ncols = n + m  # real columns then one artificial per row
    rhs = ncols  # index of the right-hand-side column

    tab = np.zeros((m, ncols + 1), dtype=np.float64)
    basis = np.empty(m, dtype=np.int64)
    for i in range(m):
        sgn = -1.0 if b_eq[i] < 0.0 else 1.0
        for j in range(n):
            tab[i, j] = sgn * a_eq[i, j]
        tab[i, n + i] = 1.0
        tab[i, rhs] = sgn * b_eq[i]
        basis[i] = n + i

    # Phase-1 cost: one per artificial column (trailing slot is the rhs).
    cost = np.zeros(ncols + 1, dtype=np.float64)
    for j in range(n, ncols):
        cost[j] = 1.0
    allowed = ncols
    phase = 1

    iters = 0
    while True:
        iters += 1
        if iters > max_iter:
            return LP_STATUS_FAILED, np.zeros(n, dtype=np.float64)

        if m > 0:
            y = cost[basis]
            reduced = cost - y @ tab
        else:
            reduced = cost.copy()

        enter = -1
        for j in range(allowed):
            if reduced[j] < -eps:
                enter = j
                break

        if enter == -1:
            if phase == 1:
                obj1 = 0.0
                for i in range(m):
                    if basis[i] >= n:
                        obj1 += tab[i, rhs]
                if obj1 > eps:
                    return LP_STATUS_INFEASIBLE, np.zeros(n, dtype=np.float64)

                # Drive leftover artificials out of the basis; a row that
                # offers no real pivot is redundant and gets dropped.
                keep = np.ones(m, dtype=np.bool_)
                for i in range(m):
                    if basis[i] >= n:
                        piv = -1
                        for j in range(n):
                            if abs(tab[i, j]) > eps:
                                piv = j
                                break
                        if piv == -1:
                            keep[i] = False
                        else:
                            prow = tab[i] / tab[i, piv]
                            tab[i, :] = prow
                            colv = tab[:, piv].copy()
                            colv[i] = 0.0
                            tab -= colv.reshape(-1, 1) * prow.reshape(1, -1)
                            basis[i] = piv
                nkeep = 0
                for i in range(m):
                    if keep[i]:
                        nkeep += 1
                if nkeep < m:
                    tab2 = np.empty((nkeep, ncols + 1), dtype=np.float64)
                    basis2 = np.empty(nkeep, dtype=np.int64)
                    k = 0
                    for i in range(m):
                        if keep[i]:
                            tab2[k] = tab[i]
                            basis2[k] = basis[i]
                            k += 1
                    tab = tab2
                    basis = basis2
                    m = nkeep

                cost = np.zeros(ncols + 1, dtype=np.float64)
                for j in range(n):
                    cost[j] = c[j]
                allowed = n  # artificials may never re-enter
                phase = 2
                continue

            x = np.zeros(n, dtype=np.float64)
            for i in range(m):
                if basis[i] < n:
                    x[basis[i]] = tab[i, rhs]
            return LP_STATUS_OPTIMAL, x

        # Ratio test over rows with positive pivot coefficient.
        leave = -1
        best = 0.0
        for i in range(m):
            coef = tab[i, enter]
            if coef > eps:
                ratio = tab[i, rhs] / coef
                if leave == -1 or ratio < best or (
                    ratio == best and basis[i] < basis[leave]
                ):
                    leave = i
                    best = ratio
        if leave == -1:
            if phase == 1:
                # Phase-1 objective is bounded below by zero.
                return LP_STATUS_FAILED, np.zeros(n, dtype=np.float64)
            return LP_STATUS_UNBOUNDED, np.zeros(n, dtype=np.float64)

        prow = tab[leave] / tab[leave, enter]
        tab[leave, :] = prow
        colv = tab[:, enter].copy()
        colv[leave] = 0.0
        tab -= colv.reshape(-1, 1) * prow.reshape(1, -1)
        basis[leave] = enter


def _rank_rowreduce_impl(a, tol):
    """Numerical rank by Gaussian elimination with partial pivoting."""
    m, n = a.shape
    work = a.copy()
    r = 0
    for col in range(n):
        if r == m:
            break
        p = r
        best = abs(work[r, col])
        for i in range(r + 1, m):
            v = abs(work[i, col])
            if v > best:
                best = v
                p = i
        if best <= tol:
            continue
        if p != r:
            tmp = work[p].copy()
            work[p] = work[r]
            work[r] = tmp
        work[r, :] = work[r] / work[r, col]
        for i in range(m):
            if i != r:
                f = work[i, col]
                if f != 0.0:
                    work[i, :] = work[i] - f * work[r]
        r += 1
    return r


simplex_two_phase = jit(_simplex_two_phase_impl)
rank_rowreduce = jit(_rank_rowreduce_impl)


def warm_up():
    """Trigger kernel compilation on a tiny problem (no-op on numpy backend)."""
    a = np.array([[1.0, 1.0]])
    b = np.array([1.0])
    c = np.ones(2)
    simplex_two_phase(a, b, c, 1e-8, 1000)
    rank_rowreduce(a, 1e-10)
