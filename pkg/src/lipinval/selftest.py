"""Brute-force reference checks on tiny instances.

The routines here avoid the solver and the encoder entirely: LPs are
decided by enumerating basic solutions, binaries by trying every
assignment, and invalidation by gridding the y boxes and testing the raw
envelope constraints point by point.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .abstraction import build_abstraction, envelope
from .dataset import make_dataset, build_regressor_dataset
from .feasolver import LinearProgram, MilfProblem

# --------------------------------------------------------------------------
# LP / MILF oracles


def lp_rows(lp: LinearProgram):
    """Constraints and finite bounds as rows ``a x <= b`` (or ``== b`` where flagged)."""
    rows, rhs, eq = [], [], []
    n = lp.num_vars
    for c in lp.constraints:
        a = np.zeros(n)
        for var, val in c.coeffs.items():
            a[var] = val
        sign = -1.0 if c.rel == ">=" else 1.0
        rows.append(sign * a)
        rhs.append(sign * c.rhs)
        eq.append(c.rel == "==")
    for v in range(n):
        e = np.zeros(n)
        e[v] = 1.0
        if math.isfinite(lp.hi[v]):
            rows.append(e); rhs.append(lp.hi[v]); eq.append(False)
        if math.isfinite(lp.lo[v]):
            rows.append(-e); rhs.append(-lp.lo[v]); eq.append(False)
    return np.array(rows).reshape(-1, n), np.array(rhs), np.array(eq, dtype=bool)


def vertex_violation(lp: LinearProgram) -> float:
    """Smallest max-violation over all basic solutions of a box-bounded LP.

    A nonempty polytope inside a finite box has a vertex, so the LP is
    feasible exactly when the result is zero up to rounding.
    """
    A, b, eq = lp_rows(lp)
    n = lp.num_vars
    best = math.inf
    for combo in itertools.combinations(range(len(b)), n):
        sub = A[list(combo)]
        if abs(np.linalg.det(sub)) < 1e-12:
            continue
        x = np.linalg.solve(sub, b[list(combo)])
        viol = A @ x - b
        viol = np.where(eq, np.abs(viol), viol)
        best = min(best, max(0.0, float(viol.max())))
    return best


def enumerate_binaries(prob: MilfProblem, lp_check) -> bool:
    """True if some 0/1 assignment of the binaries leaves ``lp_check`` satisfied."""
    for bits in itertools.product((0.0, 1.0), repeat=len(prob.binary_vars)):
        lp = prob.lp.copy()
        for var, v in zip(prob.binary_vars, bits):
            lp.lo[var] = lp.hi[var] = v
        if lp_check(lp):
            return True
    return False


def random_box_lp(rng, n: int, rows: int, box: float = 2.0) -> LinearProgram:
    lo = rng.uniform(-box, 0.0, n)
    hi = lo + rng.uniform(0.1, box, n)
    lp = LinearProgram(n, lo, hi)
    for _ in range(rows):
        a = rng.normal(size=n)
        center = rng.uniform(lo, hi)
        rel = ("<=", ">=", "<=")[int(rng.integers(3))]
        lp.add_constraint(dict(enumerate(a)), rel, float(a @ center + rng.normal(scale=0.8)))
    return lp


def random_milf(rng, k: int, n_cont: int, big_m: float = 5.0) -> MilfProblem:
    """Random mixed-binary instance with big-M switched rows."""
    n = k + n_cont
    lo = np.concatenate([np.zeros(k), rng.uniform(-2, 0, n_cont)])
    hi = np.concatenate([np.ones(k), rng.uniform(0.1, 2, n_cont)])
    lp = LinearProgram(n, lo, hi)
    for _ in range(int(rng.integers(2, 8))):
        a = np.zeros(n)
        a[k:] = rng.normal(size=n_cont)
        b = float(rng.normal(scale=0.5))
        rel = "<=" if rng.random() < 0.7 else ">="
        if k and rng.random() < 0.6:
            j = int(rng.integers(k))
            # row is enforced only for one value of binary j
            if rng.random() < 0.5:
                a[j] = big_m if rel == "<=" else -big_m
                b += big_m if rel == "<=" else -big_m
            else:
                a[j] = -big_m if rel == "<=" else big_m
        lp.add_constraint(dict(enumerate(a)), rel, b)
    if k >= 2 and rng.random() < 0.5:
        sel = rng.choice(k, size=2, replace=False)
        lp.add_constraint({int(sel[0]): 1.0, int(sel[1]): 1.0}, "==", 1.0)
    return MilfProblem(lp, list(range(k)), big_m)


# --------------------------------------------------------------------------
# invalidation grid oracle (one output, one lag)

GRID_STEP = 1e-3


def _step_ok(a_grid, b_grid, S, Y, L, eps_t, eps_w, slack):
    """``ok[a, b]``: some admissible ``w`` puts ``b - w`` inside every cone at ``a``."""
    dist = np.abs(a_grid[:, None] - S[None, :])
    upper = np.min(Y[None, :] + L * dist, axis=1) + eps_t
    lower = np.max(Y[None, :] - L * dist, axis=1) - eps_t
    b = b_grid[None, :]
    return ((lower <= upper + slack)[:, None]
            & (lower[:, None] <= b + eps_w + slack)
            & (b - eps_w <= upper[:, None] + slack))


def grid_oracle(S, Y, L, eps_t, eps_w, eps_v, observed, lower, upper, step=GRID_STEP):
    """Grid verdict for a scalar system: ``"invalidated"``, ``"not_invalidated"`` or ``"ambiguous"``.

    Points on the grid are real candidate trajectories, so a grid point that
    satisfies every constraint proves feasibility.  Conversely if no grid
    point satisfies the constraints loosened by the worst change between
    neighboring grid points, no real point can satisfy them either.
    """
    S = np.asarray(S, dtype=float).reshape(-1)
    Y = np.asarray(Y, dtype=float).reshape(-1)
    obs = np.asarray(observed, dtype=float).reshape(-1)
    lo = np.maximum(obs - eps_v, lower)
    hi = np.minimum(obs + eps_v, upper)
    if np.any(lo > hi):
        return "invalidated"
    grids = []
    worst = 0.0
    for a, b in zip(lo, hi):
        count = max(2, int(math.ceil((b - a) / step)) + 1)
        g = np.linspace(a, b, count)
        grids.append(g)
        worst = max(worst, (b - a) / (count - 1))
    relaxed_slack = (1.0 + 2.0 * L) * worst / 2.0 + 1e-12

    def feasible(slack):
        reach = np.ones(grids[0].size, dtype=bool)
        for k in range(len(grids) - 1):
            ok = _step_ok(grids[k], grids[k + 1], S, Y, L, eps_t, eps_w, slack)
            reach = np.any(ok & reach[:, None], axis=0)
            if not reach.any():
                return False
        return True

    if feasible(0.0):
        return "not_invalidated"
    if not feasible(relaxed_slack):
        return "invalidated"
    return "ambiguous"


def random_tiny_instance(rng, p="inf"):
    """Scalar abstraction with up to three pairs and an observation of length up to three.

    Each observed sample is drawn around the envelope midpoint at the
    previous sample, up to three half-widths away, so a good share of the
    instances sit near the boundary of the behavior set.
    """
    J = int(rng.integers(1, 4))
    s = rng.uniform(-1, 1, J)
    y = 0.5 * np.sin(2 * s) + rng.uniform(-0.1, 0.1, J)
    eps_v = float(rng.uniform(0.005, 0.06))
    eps_w = float(rng.uniform(0.0, 0.02))
    L = float(rng.uniform(0.3, 2.0))
    trajs = [np.array([[s[j]], [y[j]]]) for j in range(J)]
    data = make_dataset(trajs, n_y=1, eps_w=[eps_w], eps_v=[eps_v], lower=[-1.5], upper=[1.5], p=p)
    abst = build_abstraction(build_regressor_dataset(data), [L])
    T = int(rng.integers(1, 4))
    reach = float(rng.uniform(0.5, 3.0))
    obs = [float(rng.uniform(-1, 1))]
    for _ in range(T - 1):
        up, lo = envelope(abst, [[obs[-1]]])
        mid = (up[0, 0] + lo[0, 0]) / 2
        half = abs(up[0, 0] - lo[0, 0]) / 2
        obs.append(float(np.clip(mid + rng.uniform(-1, 1) * reach * half, -1.6, 1.6)))
    return abst, np.array(obs).reshape(-1, 1)


def oracle_for(abst, observed) -> str:
    d = abst.data
    return grid_oracle(d.S[:, 0], d.Y[:, 0], float(abst.L[0]), float(abst.eps_t[0]),
                       float(d.noise.eps_w[0]), float(d.noise.eps_v[0]), observed,
                       float(d.domain.lower[0]), float(d.domain.upper[0]))


# --------------------------------------------------------------------------

def run_selftest(seed: int = 0, size: int = 30, out=print) -> bool:
    """Run the small oracle suites and print one line per suite."""
    from .feasolver import Status, lp_feasible, milf_feasible, verify_certificate, verify_milf_witness
    from .invalidation import InvalidationProblem, invalidate

    rng = np.random.default_rng(seed)
    results = []

    bad = 0
    done = 0
    while done < size:
        lp = random_box_lp(rng, int(rng.integers(1, 4)), int(rng.integers(1, 6)))
        viol = vertex_violation(lp)
        if 1e-12 < viol < 1e-6:
            continue
        res = lp_feasible(lp)
        ok = res.feasible == (viol <= 1e-12)
        if ok and not res.feasible:
            ok = verify_certificate(lp, res.certificate.multipliers)
        bad += not ok
        done += 1
    results.append(("lp vs vertex enumeration", bad == 0, f"{size - bad}/{size}"))

    bad = 0
    for _ in range(size):
        prob = random_milf(rng, int(rng.integers(0, 7)), int(rng.integers(1, 5)))
        expect = enumerate_binaries(prob, lambda lp: lp_feasible(lp).feasible)
        res = milf_feasible(prob)
        ok = res.feasible == expect and (not res.feasible or verify_milf_witness(prob, res.witness))
        bad += not ok
    results.append(("milf vs binary enumeration", bad == 0, f"{size - bad}/{size}"))

    bad = done = redraws = 0
    while done < size:
        abst, obs = random_tiny_instance(rng, ("inf", "1")[done % 2])
        expect = oracle_for(abst, obs)
        if expect == "ambiguous":
            redraws += 1
            continue
        verdict = invalidate(InvalidationProblem(abst, obs), audit=True)
        solved_infeasible = verdict.by == "milf" or verdict.audit_status is Status.INFEASIBLE
        bad += verdict.invalidated != (expect == "invalidated") or solved_infeasible != verdict.invalidated
        done += 1
    results.append(("invalidation vs grid oracle", bad == 0, f"{size - bad}/{size}, {redraws} redrawn"))

    for name, ok, detail in results:
        out(f"{'PASS' if ok else 'FAIL'}  {name}  ({detail})")
    return all(ok for _, ok, _ in results)
