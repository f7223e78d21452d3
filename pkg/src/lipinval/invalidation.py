"""Invalidate an abstraction against a newly observed output trajectory.

The question is whether some noise-free trajectory ``y`` with ``|y~ - y| <=
eps_v`` and process noise ``|w| <= eps_w`` stays inside the envelopes at
every step.  If not, no system the abstraction over-approximates could have
produced the observation.  For ``p`` in ``{1, inf}`` this is a mixed-binary
linear feasibility problem: distances ``|s_k - s_j|_p`` become auxiliary
variables ``nu`` bounded above by a big-M encoding of the norm.  Since every
envelope row is loosened by a larger ``nu``, encoding ``nu <= |x|`` exactly
(rather than ``nu == |x|``) loses nothing.
"""

from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .abstraction import Abstraction
from .dataset import OutputDomain, stack_regressor
from .feasolver import LinearProgram, MilfProblem, Status, TAU_FEAS, dump, milf_feasible

# Prescreen only trusts contradictions larger than this, so a firing
# prescreen is always confirmed by the solver's own tolerances.
PRESCREEN_MARGIN = 1e-6
_DOMINANCE_MARGIN = 1e-12


class InconclusiveError(RuntimeError):
    """The solver hit a resource limit or produced an answer that failed re-checking."""


@dataclass(frozen=True)
class ObservedTrajectory:
    samples: np.ndarray

    def __post_init__(self):
        arr = np.array(self.samples, dtype=float, ndmin=2)
        if arr.ndim != 2:
            raise ValueError("observed samples must form a (T, m) array")
        if not np.all(np.isfinite(arr)):
            raise ValueError("observed samples must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    def __len__(self):
        return self.samples.shape[0]


@dataclass
class InvalidationProblem:
    abstraction: Abstraction
    observed: ObservedTrajectory
    downsampler: object = None
    y_bounds: OutputDomain | None = None

    def __post_init__(self):
        if not isinstance(self.observed, ObservedTrajectory):
            self.observed = ObservedTrajectory(self.observed)
        if self.y_bounds is None:
            self.y_bounds = self.abstraction.data.domain
        m = self.abstraction.m
        if self.observed.samples.shape[1] != m:
            raise ValueError(f"observed trajectory has {self.observed.samples.shape[1]} outputs, expected {m}")
        if self.y_bounds.m != m:
            raise ValueError("y bounds must have dimension m")

    @property
    def steps(self) -> range:
        """Time steps ``k`` with a constraint linking ``s_k`` to ``y_{k+1}``."""
        n_y = self.abstraction.data.n_y
        return range(n_y - 1, len(self.observed) - 1)


class Outcome(enum.Enum):
    INVALIDATED = "invalidated"
    NOT_INVALIDATED = "not_invalidated"


@dataclass
class VerdictStats:
    constraints: int = 0
    envelope_constraints: int = 0
    binaries: int = 0
    variables: int = 0
    active_pairs: list = field(default_factory=list)
    nodes: int = 0
    pivots: int = 0
    big_m: float = 0.0
    wall_time: float = 0.0
    milp_time: float = 0.0


@dataclass
class Verdict:
    outcome: Outcome
    by: str | None = None
    y: np.ndarray | None = None
    w: np.ndarray | None = None
    v: np.ndarray | None = None
    stats: VerdictStats = field(default_factory=VerdictStats)
    prescreen_hit: tuple | None = None
    audit_status: Status | None = None

    @property
    def invalidated(self) -> bool:
        return self.outcome is Outcome.INVALIDATED


# --------------------------------------------------------------------------
# geometry shared by the encoder, the prescreen and the witness check

def _pnorm(arr: np.ndarray, p: float) -> np.ndarray:
    if p == math.inf:
        return arr.max(axis=-1) if arr.shape[-1] else np.zeros(arr.shape[:-1])
    if p == 1.0:
        return arr.sum(axis=-1)
    return np.linalg.norm(arr, ord=p, axis=-1)


class _Boxes:
    """Per-sample y boxes and per-step regressor boxes."""

    def __init__(self, prob: InvalidationProblem):
        a = prob.abstraction
        noise = a.data.noise
        obs = prob.observed.samples
        self.meas_lo = obs - noise.eps_v
        self.meas_hi = obs + noise.eps_v
        lo = np.maximum(self.meas_lo, prob.y_bounds.lower)
        hi = np.minimum(self.meas_hi, prob.y_bounds.upper)
        self.empty = lo > hi
        # Where the intersection is empty, keep the measurement box as bounds
        # and let explicit domain rows produce the contradiction.
        self.lo = np.where(self.empty, self.meas_lo, lo)
        self.hi = np.where(self.empty, self.meas_hi, hi)
        self.n_y = a.data.n_y

    def regressor(self, k: int) -> tuple[np.ndarray, np.ndarray]:
        return stack_regressor(self.lo, k, self.n_y), stack_regressor(self.hi, k, self.n_y)


def _offsets(S: np.ndarray, slo: np.ndarray, shi: np.ndarray):
    """Per-coordinate range of ``|s - s_j|`` over the regressor box."""
    x_lo = slo - S
    x_hi = shi - S
    absmin = np.where(x_lo > 0, x_lo, np.where(x_hi < 0, -x_hi, 0.0))
    absmax = np.maximum(np.abs(x_lo), np.abs(x_hi))
    return x_lo, x_hi, absmin, absmax


def active_pairs(prob: InvalidationProblem) -> list[np.ndarray]:
    """Pair indices used at each step; all pairs unless a downsampler is set."""
    a = prob.abstraction
    steps = prob.steps
    if prob.downsampler is None:
        every = np.arange(len(a.data))
        return [every for _ in steps]
    state = prob.downsampler
    if not hasattr(state, "select"):
        state = state.prepare(a.data)
    obs = prob.observed.samples
    out = []
    for k in steps:
        query = stack_regressor(obs, k, a.data.n_y)
        idx = np.asarray(state.select(query), dtype=np.int64)
        if idx.size == 0:
            raise ValueError("downsampler returned no pairs")
        out.append(np.unique(idx))
    return out


def big_m(prob: InvalidationProblem, boxes: _Boxes, active) -> float:
    """Big-M constant: the domain-based formula, raised if the boxes need more.

    Exactness needs ``M >= 2 |x_d|`` for sign binaries and ``M >= |x|_p`` for
    selectors, over every regressor box and active pair.
    """
    a = prob.abstraction
    dom = prob.y_bounds
    rlo, rhi = dom.regressor_box(a.data.n_y)
    diam_s = float(_pnorm(rhi - rlo, a.p))
    diam_y = float(np.max(dom.upper - dom.lower))
    formula = float(np.max(a.L)) * diam_s + diam_y + 2 * float(np.max(a.eps_t)) + 2 * float(np.max(a.data.noise.eps_w))
    need = 0.0
    for k, idx in zip(prob.steps, active):
        slo, shi = boxes.regressor(k)
        _, _, _, absmax = _offsets(a.data.S[idx], slo, shi)
        if absmax.size:
            need = max(need, 2 * float(absmax.max()), float(_pnorm(absmax, a.p).max()))
    return max(formula, need * (1 + 1e-9) + 1e-9)


# --------------------------------------------------------------------------
# encoding

@dataclass
class Encoding:
    problem: MilfProblem
    y_index: np.ndarray   # (T, m) variable indices
    w_index: np.ndarray   # (steps, m) variable indices
    active: list
    envelope_constraints: int


def encode(prob: InvalidationProblem, tighten: bool = False, active=None) -> Encoding:
    """Build the mixed-binary feasibility problem for ``prob``.

    With ``tighten`` the encoder leaves out rows and binaries that cannot
    matter on the boxes: envelope rows dominated by another pair's cone or
    satisfied everywhere on the box, sign binaries whose sign the box
    already decides, and max-norm selectors for coordinates that can never
    attain the maximum.  The feasible set projected onto ``(y, w)`` is the
    same either way.
    """
    a = prob.abstraction
    if a.p not in (1.0, math.inf):
        raise ValueError("MILP encoding requires p in {1, inf}")
    data = a.data
    m, n, p = a.m, a.n, a.p
    T = len(prob.observed)
    steps = prob.steps
    boxes = _Boxes(prob)
    if active is None:
        active = active_pairs(prob)
    M = big_m(prob, boxes, active)
    eps_w = data.noise.eps_w
    L = a.L
    eps_t = a.eps_t

    lp = LinearProgram(0)
    binaries = []
    y_index = np.empty((T, m), dtype=np.int64)
    for k in range(T):
        for i in range(m):
            y_index[k, i] = lp.add_variable(boxes.lo[k, i], boxes.hi[k, i], f"y[{k},{i}]")
    for k, i in zip(*np.nonzero(boxes.empty)):
        lp.add_constraint({int(y_index[k, i]): 1.0}, ">=", float(prob.y_bounds.lower[i]), f"dom_lo[{k},{i}]")
        lp.add_constraint({int(y_index[k, i]): 1.0}, "<=", float(prob.y_bounds.upper[i]), f"dom_hi[{k},{i}]")
    w_index = np.empty((len(steps), m), dtype=np.int64)
    for s_pos, k in enumerate(steps):
        for i in range(m):
            w_index[s_pos, i] = lp.add_variable(-eps_w[i], eps_w[i], f"w[{k},{i}]")

    n_env = 0
    for s_pos, k in enumerate(steps):
        idx = active[s_pos]
        S = data.S[idx]
        Yj = data.Y[idx]
        slo, shi = boxes.regressor(k)
        x_lo, x_hi, absmin, absmax = _offsets(S, slo, shi)
        mindist = _pnorm(absmin, p)
        maxdist = _pnorm(absmax, p)
        # y_{k+1} - w_k ranges over [zlo, zhi]
        zlo = boxes.lo[k + 1] - eps_w
        zhi = boxes.hi[k + 1] + eps_w
        keep_up = np.ones((len(idx), m), dtype=bool)
        keep_lo = np.ones((len(idx), m), dtype=bool)
        if tighten:
            up_best = Yj + L * mindist[:, None]
            up_worst = Yj + L * maxdist[:, None]
            lo_best = Yj - L * mindist[:, None]
            lo_worst = Yj - L * maxdist[:, None]
            cols = np.arange(m)
            a_up = np.argmin(up_worst, axis=0)
            a_lo = np.argmax(lo_worst, axis=0)
            keep_up = up_best <= up_worst[a_up, cols] + _DOMINANCE_MARGIN
            keep_up[a_up, cols] = True
            keep_lo = lo_best >= lo_worst[a_lo, cols] - _DOMINANCE_MARGIN
            keep_lo[a_lo, cols] = True
            keep_up &= zhi > up_best + eps_t
            keep_lo &= zlo < lo_best - eps_t
        for r, j in enumerate(idx):
            if not (keep_up[r].any() or keep_lo[r].any()):
                continue
            nu = lp.add_variable(mindist[r] if tighten else 0.0, maxdist[r], f"nu[{k},{j}]")
            coords = range(n)
            if tighten and p == math.inf:
                top = absmin[r].max()
                coords = [d for d in range(n) if absmax[r, d] >= top]
            t_vars = {}
            for d in coords:
                q, i = divmod(d, m)
                yv = int(y_index[k - q, i])
                sjd = float(S[r, d])
                t = lp.add_variable(absmin[r, d] if tighten else 0.0, absmax[r, d], f"t[{k},{j},{d}]")
                t_vars[d] = t
                if tighten and x_lo[r, d] >= 0:
                    lp.add_constraint({t: 1.0, yv: -1.0}, "<=", -sjd)
                elif tighten and x_hi[r, d] <= 0:
                    lp.add_constraint({t: 1.0, yv: 1.0}, "<=", sjd)
                else:
                    delta = lp.add_variable(0.0, 1.0, f"sign[{k},{j},{d}]")
                    binaries.append(delta)
                    lp.add_constraint({t: 1.0, yv: -1.0, delta: M}, "<=", M - sjd)
                    lp.add_constraint({t: 1.0, yv: 1.0, delta: -M}, "<=", sjd)
            if p == 1.0:
                row = {nu: 1.0}
                for t in t_vars.values():
                    row[t] = -1.0
                lp.add_constraint(row, "<=", 0.0)
            elif len(t_vars) == 1:
                (t,) = t_vars.values()
                lp.add_constraint({nu: 1.0, t: -1.0}, "<=", 0.0)
            else:
                sel = {}
                for d, t in t_vars.items():
                    sigma = lp.add_variable(0.0, 1.0, f"sel[{k},{j},{d}]")
                    binaries.append(sigma)
                    sel[sigma] = 1.0
                    lp.add_constraint({nu: 1.0, t: -1.0, sigma: M}, "<=", M)
                lp.add_constraint(sel, "==", 1.0)
            for i in range(m):
                yv = int(y_index[k + 1, i])
                wv = int(w_index[s_pos, i])
                if keep_up[r, i]:
                    lp.add_constraint({yv: 1.0, wv: -1.0, nu: -float(L[i])}, "<=",
                                      float(Yj[r, i] + eps_t[i]), f"up[{k},{j},{i}]")
                    n_env += 1
                if keep_lo[r, i]:
                    lp.add_constraint({yv: 1.0, wv: -1.0, nu: float(L[i])}, ">=",
                                      float(Yj[r, i] - eps_t[i]), f"lo[{k},{j},{i}]")
                    n_env += 1
    return Encoding(MilfProblem(lp, binaries, M), y_index, w_index, active, n_env)


# --------------------------------------------------------------------------
# prescreen

def prescreen(prob: InvalidationProblem, active=None):
    """Cheap sound test; returns ``(k, j, i)`` of a contradiction or ``None``.

    For each step, pair and output it compares the smallest possible
    ``|y_{k+1} - w_k - y'_j|`` over the boxes with the largest possible
    ``L |s_k - s_j|_p + eps_t``.  An empty y box is reported with ``j=None``.
    """
    a = prob.abstraction
    boxes = _Boxes(prob)
    lo = np.maximum(boxes.meas_lo, prob.y_bounds.lower)
    hi = np.minimum(boxes.meas_hi, prob.y_bounds.upper)
    empty = lo - hi > PRESCREEN_MARGIN * np.maximum(1.0, np.abs(lo))
    if empty.any():
        k, i = map(int, np.argwhere(empty)[0])
        return (k, None, i)
    if active is None:
        active = active_pairs(prob)
    eps_w = a.data.noise.eps_w
    for s_pos, k in enumerate(prob.steps):
        idx = active[s_pos]
        slo, shi = boxes.regressor(k)
        _, _, _, absmax = _offsets(a.data.S[idx], slo, shi)
        rhs = a.L * _pnorm(absmax, a.p)[:, None] + a.eps_t
        z_lo = boxes.lo[k + 1] - eps_w - a.data.Y[idx]
        z_hi = boxes.hi[k + 1] + eps_w - a.data.Y[idx]
        lhs = np.where(z_lo > 0, z_lo, np.where(z_hi < 0, -z_hi, 0.0))
        hit = lhs > rhs + PRESCREEN_MARGIN * np.maximum(1.0, rhs)
        if hit.any():
            r, i = map(int, np.argwhere(hit)[0])
            return (k, int(idx[r]), i)
    return None


# --------------------------------------------------------------------------
# witness re-check against the envelope constraints with true norms

def witness_residual(prob: InvalidationProblem, y: np.ndarray, w: np.ndarray, active=None) -> float:
    a = prob.abstraction
    obs = prob.observed.samples
    noise = a.data.noise
    v = obs - y
    worst = max(0.0, float(np.max(np.abs(v) - noise.eps_v, initial=0.0)))
    worst = max(worst, float(np.max(prob.y_bounds.lower - y, initial=0.0)),
                float(np.max(y - prob.y_bounds.upper, initial=0.0)))
    if w.size:
        worst = max(worst, float(np.max(np.abs(w) - noise.eps_w)))
    if active is None:
        active = active_pairs(prob)
    for s_pos, k in enumerate(prob.steps):
        idx = active[s_pos]
        s = stack_regressor(y, k, a.data.n_y)
        dist = kernels.distances(a.data.S[idx], s, a.p)
        z = y[k + 1] - w[s_pos]
        upper = np.min(a.data.Y[idx] + a.L * dist[:, None], axis=0) + a.eps_t
        lower = np.max(a.data.Y[idx] - a.L * dist[:, None], axis=0) - a.eps_t
        worst = max(worst, float(np.max(z - upper)), float(np.max(lower - z)))
    return worst


# --------------------------------------------------------------------------

def invalidate(prob: InvalidationProblem, audit: bool = False, tighten: bool = True,
               max_nodes: int = 10**5, max_pivots: int = 10**6, dump_path=None) -> Verdict:
    """Decide whether the observation is inconsistent with the abstraction.

    Runs the interval prescreen first.  When it fires the answer is
    ``INVALIDATED`` without solving, unless ``audit`` is set, in which case
    the mixed-binary program is solved anyway and its status recorded in
    ``audit_status``.  Raises :class:`InconclusiveError` on solver limits.
    """
    start = time.perf_counter()
    active = active_pairs(prob)
    stats = VerdictStats(active_pairs=[int(len(i)) for i in active])
    hit = prescreen(prob, active)
    if hit is not None and not audit and dump_path is None:
        stats.wall_time = time.perf_counter() - start
        return Verdict(Outcome.INVALIDATED, "prescreen", stats=stats, prescreen_hit=hit)

    milp_start = time.perf_counter()
    enc = encode(prob, tighten=tighten, active=active)
    lp = enc.problem.lp
    stats.constraints = lp.num_constraints
    stats.envelope_constraints = enc.envelope_constraints
    stats.binaries = len(enc.problem.binary_vars)
    stats.variables = lp.num_vars
    stats.big_m = enc.problem.big_m
    if dump_path is not None:
        dump(enc.problem, dump_path)
    res = milf_feasible(enc.problem, max_nodes=max_nodes, max_pivots=max_pivots)
    stats.milp_time = time.perf_counter() - milp_start
    stats.nodes = res.stats.nodes
    stats.pivots = res.stats.pivots

    if hit is not None:
        stats.wall_time = time.perf_counter() - start
        return Verdict(Outcome.INVALIDATED, "prescreen", stats=stats, prescreen_hit=hit,
                       audit_status=res.status)
    if res.status is Status.ITERATION_LIMIT:
        raise InconclusiveError(f"solver stopped after {res.stats.nodes} nodes / {res.stats.pivots} pivots")
    if res.status is Status.INFEASIBLE:
        stats.wall_time = time.perf_counter() - start
        return Verdict(Outcome.INVALIDATED, "milf", stats=stats)

    x = res.witness
    y = x[enc.y_index]
    w = x[enc.w_index] if enc.w_index.size else np.zeros((0, prob.abstraction.m))
    resid = witness_residual(prob, y, w, active)
    if resid > TAU_FEAS:
        raise InconclusiveError(f"solver witness fails the envelope re-check by {resid:.3g}")
    stats.wall_time = time.perf_counter() - start
    return Verdict(Outcome.NOT_INVALIDATED, None, y, w, prob.observed.samples - y, stats)
