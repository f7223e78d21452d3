"""Checks of solver output that do not share code with the simplex.

Everything here walks the sparse constraint dictionaries directly, so a bug
in the dense tableau cannot hide itself.
"""

from __future__ import annotations

import math

from .model import GE, TAU_CERT, TAU_FEAS, TAU_INT, LinearProgram, MilfProblem


def max_violation(lp: LinearProgram, x) -> float:
    """Largest bound or constraint violation of ``x`` (0 when feasible)."""
    if len(x) != lp.num_vars:
        raise ValueError("witness has the wrong length")
    worst = 0.0
    for v, (lo, hi) in enumerate(zip(lp.lo, lp.hi)):
        xv = float(x[v])
        if math.isnan(xv):
            return math.inf
        worst = max(worst, lo - xv, xv - hi)
    for c in lp.constraints:
        lhs = math.fsum(val * float(x[var]) for var, val in c.coeffs.items())
        if c.rel == "<=":
            worst = max(worst, lhs - c.rhs)
        elif c.rel == ">=":
            worst = max(worst, c.rhs - lhs)
        else:
            worst = max(worst, abs(lhs - c.rhs))
    return worst


def verify_witness(lp: LinearProgram, x, tol: float = TAU_FEAS) -> bool:
    return max_violation(lp, x) <= tol


def verify_milf_witness(prob: MilfProblem, x, tol: float = TAU_FEAS, int_tol: float = TAU_INT) -> bool:
    if not verify_witness(prob.lp, x, tol):
        return False
    return all(min(abs(float(x[v])), abs(float(x[v]) - 1.0)) <= int_tol for v in prob.binary_vars)


def certificate_gap(lp: LinearProgram, multipliers, lo=None, hi=None) -> float:
    """Contradiction margin of a Farkas combination.

    Combines the rows (``>=`` rows flipped) with the given multipliers into a
    single inequality ``c x <= beta`` and returns ``min_box(c x) - beta``.  A
    positive value proves that no point in the box satisfies all rows.
    Returns ``-inf`` if a multiplier has the wrong sign.
    """
    lo = lp.lo if lo is None else lo
    hi = lp.hi if hi is None else hi
    if len(multipliers) != lp.num_constraints:
        raise ValueError("need one multiplier per constraint")
    combined: dict[int, list] = {}
    rhs_terms = []
    for lam, c in zip(multipliers, lp.constraints):
        lam = float(lam)
        if lam == 0.0:
            continue
        if c.rel != "==" and lam < 0.0:
            return -math.inf
        sign = -1.0 if c.rel == GE else 1.0
        for var, val in c.coeffs.items():
            combined.setdefault(var, []).append(sign * lam * val)
        rhs_terms.append(sign * lam * c.rhs)
    beta = math.fsum(rhs_terms)
    terms = []
    for var, parts in combined.items():
        cv = math.fsum(parts)
        if cv > 0.0:
            bound = lo[var]
        elif cv < 0.0:
            bound = hi[var]
        else:
            continue
        if math.isinf(bound):
            return -math.inf
        terms.append(cv * bound)
    return math.fsum(terms) - beta


def verify_certificate(lp: LinearProgram, multipliers, tol: float = TAU_CERT, lo=None, hi=None) -> bool:
    return certificate_gap(lp, multipliers, lo, hi) > tol
