"""LP and mixed-binary feasibility with verified answers."""

from __future__ import annotations

import time

import numpy as np

from .model import (GE, TAU_CERT, TAU_FEAS, TAU_INT, Certificate, LinearProgram, MilfProblem,
                    SolveResult, SolveStats, Status)
from .simplex import PivotLimit, phase1
from .verify import certificate_gap, max_violation


class _Dense:
    """Dense copy of an LP, built once and reused across branch-and-bound nodes."""

    def __init__(self, lp: LinearProgram):
        lp.validate()
        self.lp = lp
        self.A, self.sense, self.b = lp.dense()
        if not (np.all(np.isfinite(self.A)) and np.all(np.isfinite(self.b))):
            raise ValueError("constraint data must be finite")
        self.lo, self.hi = lp.bounds()
        self.flip = np.array([-1.0 if c.rel == GE else 1.0 for c in lp.constraints])


def _solve_bounds(dense: _Dense, lo, hi, max_pivots: int):
    """Returns ``(status, x, certificate, pivots)`` for the LP with the given bounds."""
    if np.any(lo > hi):
        # Contradictory bounds need no rows: the empty combination suffices.
        cert = Certificate(np.zeros(dense.lp.num_constraints), np.inf, True)
        return Status.INFEASIBLE, None, cert, 0
    try:
        res = phase1(dense.A, dense.sense, dense.b, lo, hi, max_pivots)
    except PivotLimit as exc:
        return Status.ITERATION_LIMIT, None, None, exc.pivots
    x = np.clip(res.x, lo, hi)
    if res.feasible and _witness_ok(dense.lp, x, lo, hi):
        return Status.FEASIBLE, x, None, res.pivots
    if res.row_duals is not None:
        lam = -res.row_duals * dense.flip
        eq = dense.sense == 0
        lam[~eq] = np.maximum(lam[~eq], 0.0)
        gap = certificate_gap(dense.lp, lam, lo, hi)
        if gap > TAU_CERT:
            return Status.INFEASIBLE, None, Certificate(lam, gap, True), res.pivots
    if _witness_ok(dense.lp, x, lo, hi):
        return Status.FEASIBLE, x, None, res.pivots
    # Neither answer could be confirmed; report infeasible with the unverified
    # combination so callers can inspect it.
    lam = np.zeros(dense.lp.num_constraints) if res.row_duals is None else -res.row_duals * dense.flip
    return Status.INFEASIBLE, None, Certificate(lam, certificate_gap(dense.lp, lam, lo, hi), False), res.pivots


def _witness_ok(lp, x, lo, hi) -> bool:
    if np.any(x < lo - TAU_FEAS) or np.any(x > hi + TAU_FEAS):
        return False
    return max_violation(lp, x) <= TAU_FEAS


def lp_feasible(lp: LinearProgram, max_pivots: int = 10**6) -> SolveResult:
    """Decide feasibility of ``lp``.

    A feasible answer carries a witness that passes an independent residual
    check; an infeasible one carries verified Farkas multipliers.
    """
    start = time.perf_counter()
    dense = _Dense(lp)
    status, x, cert, pivots = _solve_bounds(dense, dense.lo, dense.hi, max_pivots)
    stats = SolveStats(pivots=pivots, nodes=1, wall_time=time.perf_counter() - start)
    return SolveResult(status, x, cert, stats)


def _fractionality(x, binaries):
    vals = x[binaries]
    return np.minimum(np.abs(vals), np.abs(vals - 1.0))


def milf_feasible(prob: MilfProblem, max_nodes: int = 10**5, max_pivots: int = 10**6,
                  keep_certificates: bool = False) -> SolveResult:
    """Depth-first branch and bound over the binary variables.

    Branches on the most fractional binary (lowest index on ties) and dives
    into the child matching its rounding first.  Stops at the first integral
    feasible leaf.  ``max_pivots`` caps the simplex pivots summed over nodes.
    """
    start = time.perf_counter()
    dense = _Dense(prob.lp)
    binaries = np.array(prob.binary_vars, dtype=np.int64)
    stats = SolveStats()
    leaves = []

    def finish(status, x=None, cert=None):
        stats.wall_time = time.perf_counter() - start
        return SolveResult(status, x, cert, stats, leaves)

    stack = [dict()]
    while stack:
        fixed = stack.pop()
        if stats.nodes >= max_nodes:
            return finish(Status.ITERATION_LIMIT)
        stats.nodes += 1
        lo = dense.lo.copy()
        hi = dense.hi.copy()
        for var, v in fixed.items():
            lo[var] = hi[var] = v
        status, x, cert, piv = _solve_bounds(dense, lo, hi, max_pivots - stats.pivots)
        stats.pivots += piv
        if status is Status.ITERATION_LIMIT:
            return finish(Status.ITERATION_LIMIT)
        if status is Status.INFEASIBLE:
            if keep_certificates:
                leaves.append((dict(fixed), cert))
            continue
        if binaries.size == 0:
            return finish(Status.FEASIBLE, x)
        frac = _fractionality(x, binaries)
        if frac.max() <= TAU_INT:
            # Snap the binaries and re-solve so the witness is exactly integral.
            lo2, hi2 = lo.copy(), hi.copy()
            snapped = np.round(x[binaries])
            lo2[binaries] = hi2[binaries] = snapped
            status2, x2, cert2, piv = _solve_bounds(dense, lo2, hi2, max_pivots - stats.pivots)
            stats.pivots += piv
            if status2 is Status.FEASIBLE:
                return finish(Status.FEASIBLE, x2)
            if status2 is Status.ITERATION_LIMIT:
                return finish(Status.ITERATION_LIMIT)
            if max_violation(prob.lp, x) <= TAU_FEAS:
                return finish(Status.FEASIBLE, x)
            free = [i for i, v in enumerate(binaries) if int(v) not in fixed]
            if not free:
                if keep_certificates:
                    leaves.append((dict(fixed), cert2))
                continue
            pick = max(free, key=lambda i: (frac[i], -i))
        else:
            pick = int(np.argmax(frac))
        var = int(binaries[pick])
        first = 1.0 if x[var] >= 0.5 else 0.0
        stack.append({**fixed, var: 1.0 - first})
        stack.append({**fixed, var: first})
    return finish(Status.INFEASIBLE)
