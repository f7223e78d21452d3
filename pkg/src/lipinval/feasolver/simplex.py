"""Dense bounded-variable primal simplex for phase-1 feasibility.

Each row ``a x (<=|>=|==) b`` gets a slack ``s`` with ``a x + s = b`` whose
bounds encode the relation.  Starting from every structural variable at a
finite bound, rows whose slack would land outside its bounds receive an
artificial column, and the sum of artificials is driven to zero.  The final
basis gives a Farkas combination when the minimum stays positive.

Entering columns are picked by largest reduced cost and the search falls
back to Bland's lowest-index rule after a run of degenerate pivots.  The
ratio test includes bound flips of the entering column.
"""

from __future__ import annotations

import numpy as np

_AT_LO, _AT_HI, _FREE, _BASIC = 0, 1, 2, 3

_DJ_TOL = 1e-9
_PIV_TOL = 1e-9
_OBJ_TOL = 1e-9
_REFACTOR_EVERY = 50
_DEGENERATE_RUN = 25


class PivotLimit(Exception):
    def __init__(self, pivots):
        super().__init__(f"pivot limit reached after {pivots} pivots")
        self.pivots = pivots


class Phase1Result:
    __slots__ = ("feasible", "x", "row_duals", "infeasibility", "pivots")

    def __init__(self, feasible, x, row_duals, infeasibility, pivots):
        self.feasible = feasible
        self.x = x
        # Multipliers ``y`` for rows written as ``a x + s = b``; the combination
        # ``y^T A x + y^T s = y^T b`` is contradictory when phase 1 fails.
        self.row_duals = row_duals
        self.infeasibility = infeasibility
        self.pivots = pivots


def phase1(A: np.ndarray, sense: np.ndarray, b: np.ndarray, lo: np.ndarray, hi: np.ndarray,
           max_pivots: int = 10**6) -> Phase1Result:
    m, n = A.shape
    slo = np.where(sense > 0, 0.0, np.where(sense < 0, -np.inf, 0.0))
    shi = np.where(sense < 0, 0.0, np.where(sense > 0, np.inf, 0.0))

    x0 = np.where(np.isfinite(lo), lo, np.where(np.isfinite(hi), hi, 0.0))
    resid = b - A @ x0
    clipped = np.clip(resid, slo, shi)
    need_art = np.abs(resid - clipped) > 0.0
    art_rows = np.nonzero(need_art)[0]
    k = art_rows.size
    sigma = np.sign(resid[art_rows])

    N = n + m + k
    M = np.zeros((m, N))
    M[:, :n] = A
    M[:, n:n + m] = np.eye(m)
    M[art_rows, n + m + np.arange(k)] = sigma

    lo_all = np.concatenate([lo, slo, np.zeros(k)])
    hi_all = np.concatenate([hi, shi, np.full(k, np.inf)])
    cost = np.concatenate([np.zeros(n + m), np.ones(k)])

    state = np.empty(N, dtype=np.int8)
    val = np.zeros(N)
    state[:n] = np.where(np.isfinite(lo), _AT_LO, np.where(np.isfinite(hi), _AT_HI, _FREE))
    val[:n] = x0
    # Slacks of rows that need an artificial sit at zero, which is one of
    # their bounds; the others are basic.
    state[n:n + m] = _AT_LO
    state[n + art_rows] = np.where(sense[art_rows] < 0, _AT_HI, _AT_LO)
    val[n:n + m] = 0.0
    basis = n + np.arange(m)
    basis[art_rows] = n + m + np.arange(k)
    state[basis] = _BASIC
    val[basis] = 0.0

    if k == 0:
        x = x0.copy()
        return Phase1Result(True, x, None, 0.0, 0)

    def refactor():
        B = M[:, basis]
        T = np.linalg.solve(B, M)
        nb = state != _BASIC
        beta = np.linalg.solve(B, b - M[:, nb] @ val[nb])
        d = cost - cost[basis] @ T
        return T, beta, d

    T, beta, d = refactor()
    pivots = 0
    since_refactor = 0
    degenerate = 0
    bland = False
    lo_b = lo_all[basis]
    hi_b = hi_all[basis]

    while True:
        if cost[basis] @ beta <= _OBJ_TOL:
            break
        nonbasic = state != _BASIC
        movable = nonbasic & (hi_all > lo_all)
        up = movable & (state != _AT_HI) & (d < -_DJ_TOL)
        down = movable & (state != _AT_LO) & (d > _DJ_TOL)
        cand = up | down
        if not cand.any():
            if since_refactor:
                T, beta, d = refactor()
                since_refactor = 0
                lo_b = lo_all[basis]
                hi_b = hi_all[basis]
                continue
            break
        if bland:
            j = int(np.argmax(cand))
        else:
            score = np.where(cand, np.abs(d), -1.0)
            j = int(np.argmax(score))
        direction = 1.0 if up[j] else -1.0

        if pivots >= max_pivots:
            raise PivotLimit(pivots)

        alpha = direction * T[:, j]
        limits = np.full(m, np.inf)
        dec = alpha > _PIV_TOL
        inc = alpha < -_PIV_TOL
        with np.errstate(invalid="ignore", divide="ignore"):
            limits[dec] = (beta[dec] - lo_b[dec]) / alpha[dec]
            limits[inc] = (hi_b[inc] - beta[inc]) / -alpha[inc]
        limits = np.maximum(limits, 0.0)
        row_theta = limits.min() if m else np.inf
        flip_theta = hi_all[j] - lo_all[j]

        if flip_theta <= row_theta:
            if not np.isfinite(flip_theta):
                # No bound limits the move: numerically stale tableau.
                T, beta, d = refactor()
                since_refactor = 0
                continue
            beta = beta - flip_theta * alpha
            if direction > 0:
                state[j] = _AT_HI
                val[j] = hi_all[j]
            else:
                state[j] = _AT_LO
                val[j] = lo_all[j]
            theta = flip_theta
        else:
            ties = np.nonzero(limits <= row_theta + 1e-12)[0]
            if bland:
                r = int(ties[np.argmin(basis[ties])])
            else:
                r = int(ties[np.argmax(np.abs(alpha[ties]))])
            theta = row_theta
            entering = val[j] + direction * theta
            beta = beta - theta * alpha
            leave = basis[r]
            if alpha[r] > 0:
                state[leave] = _AT_LO
                val[leave] = lo_all[leave]
            else:
                state[leave] = _AT_HI
                val[leave] = hi_all[leave]
            if leave >= n + m:
                # Artificials never re-enter once out of the basis.
                hi_all[leave] = 0.0
                state[leave] = _AT_LO
                val[leave] = 0.0
            piv_row = T[r] / T[r, j]
            col = T[:, j].copy()
            col[r] = 0.0
            T -= np.outer(col, piv_row)
            T[r] = piv_row
            d = d - d[j] * piv_row
            basis[r] = j
            state[j] = _BASIC
            val[j] = 0.0
            beta[r] = entering
            lo_b[r] = lo_all[j]
            hi_b[r] = hi_all[j]
            since_refactor += 1
        pivots += 1

        if theta <= 1e-12:
            degenerate += 1
            if degenerate >= _DEGENERATE_RUN:
                bland = True
        else:
            degenerate = 0
            bland = False

        if since_refactor >= _REFACTOR_EVERY:
            T, beta, d = refactor()
            since_refactor = 0
            lo_b = lo_all[basis]
            hi_b = hi_all[basis]

    if since_refactor:
        T, beta, d = refactor()
    full = val.copy()
    full[basis] = beta
    infeas = float(cost @ full)
    x = full[:n]
    if infeas <= _OBJ_TOL:
        return Phase1Result(True, x, None, infeas, pivots)
    B = M[:, basis]
    y = np.linalg.solve(B.T, cost[basis])
    return Phase1Result(False, x, y, infeas, pivots)
