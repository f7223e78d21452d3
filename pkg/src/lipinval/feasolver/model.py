"""Problem containers for linear and mixed-integer linear feasibility."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

LE, GE, EQ = "<=", ">=", "=="
_SENSE = {LE: 1, GE: -1, EQ: 0}

# Residual tolerance for witnesses, integrality tolerance for binaries,
# and the minimum contradiction margin an infeasibility certificate must show.
TAU_FEAS = 1e-7
TAU_INT = 1e-6
TAU_CERT = 1e-9


@dataclass
class Constraint:
    coeffs: dict
    rel: str
    rhs: float
    name: str = ""


class LinearProgram:
    """Variables with box bounds and a list of sparse linear constraints.

    Bounds may be infinite.  There is no objective: the only question asked of
    a ``LinearProgram`` is whether it has a feasible point.
    """

    def __init__(self, num_vars: int = 0, lo=None, hi=None):
        self.lo: list[float] = [0.0] * num_vars if lo is None else [float(v) for v in lo]
        self.hi: list[float] = [math.inf] * num_vars if hi is None else [float(v) for v in hi]
        if len(self.lo) != num_vars or len(self.hi) != num_vars:
            raise ValueError("bound vectors must have length num_vars")
        self.names: list[str] = [f"x{i}" for i in range(num_vars)]
        self.constraints: list[Constraint] = []

    @property
    def num_vars(self) -> int:
        return len(self.lo)

    @property
    def num_constraints(self) -> int:
        return len(self.constraints)

    def add_variable(self, lo: float = 0.0, hi: float = math.inf, name: str | None = None) -> int:
        if lo > hi:
            raise ValueError(f"empty bounds [{lo}, {hi}] for variable {name}")
        self.lo.append(float(lo))
        self.hi.append(float(hi))
        self.names.append(name or f"x{len(self.lo) - 1}")
        return len(self.lo) - 1

    def add_constraint(self, coeffs, rel: str, rhs: float, name: str = "") -> int:
        if rel not in _SENSE:
            raise ValueError(f"unknown relation {rel!r}")
        clean = {}
        for var, val in dict(coeffs).items():
            if not 0 <= var < self.num_vars:
                raise ValueError(f"coefficient index {var} out of range")
            val = float(val)
            if not math.isfinite(val):
                raise ValueError("constraint coefficients must be finite")
            if val != 0.0:
                clean[int(var)] = clean.get(int(var), 0.0) + val
        if not math.isfinite(rhs):
            raise ValueError("constraint right-hand side must be finite")
        self.constraints.append(Constraint(clean, rel, float(rhs), name))
        return len(self.constraints) - 1

    def validate(self) -> None:
        for i, (lo, hi) in enumerate(zip(self.lo, self.hi)):
            if math.isnan(lo) or math.isnan(hi) or lo > hi:
                raise ValueError(f"variable {self.names[i]} has invalid bounds [{lo}, {hi}]")
        for c in self.constraints:
            if any(not 0 <= v < self.num_vars for v in c.coeffs):
                raise ValueError(f"constraint {c.name!r} references a missing variable")

    def dense(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(A, sense, b)`` with sense +1 for <=, -1 for >=, 0 for ==."""
        A = np.zeros((self.num_constraints, self.num_vars))
        sense = np.empty(self.num_constraints, dtype=np.int8)
        b = np.empty(self.num_constraints)
        for r, c in enumerate(self.constraints):
            for var, val in c.coeffs.items():
                A[r, var] = val
            sense[r] = _SENSE[c.rel]
            b[r] = c.rhs
        return A, sense, b

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return np.array(self.lo, dtype=float), np.array(self.hi, dtype=float)

    def copy(self) -> "LinearProgram":
        out = LinearProgram(self.num_vars, self.lo, self.hi)
        out.names = list(self.names)
        out.constraints = [Constraint(dict(c.coeffs), c.rel, c.rhs, c.name) for c in self.constraints]
        return out


@dataclass
class MilfProblem:
    lp: LinearProgram
    binary_vars: list = field(default_factory=list)
    big_m: float = 0.0

    def __post_init__(self):
        self.binary_vars = sorted(set(int(v) for v in self.binary_vars))
        for v in self.binary_vars:
            if not 0 <= v < self.lp.num_vars:
                raise ValueError(f"binary variable {v} out of range")
            if self.lp.lo[v] < 0.0 or self.lp.hi[v] > 1.0:
                raise ValueError(f"binary variable {v} must have bounds within [0, 1]")
        if not math.isfinite(self.big_m):
            raise ValueError("big_m must be finite")


class Status(enum.Enum):
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"
    ITERATION_LIMIT = "iteration_limit"


@dataclass
class Certificate:
    """Farkas multipliers, one per constraint row.

    Rows are read as ``a x <= b`` after flipping ``>=`` rows, so multipliers
    of inequality rows are nonnegative and those of equality rows are free.
    ``gap`` is the margin by which the combined row contradicts the bounds.
    """

    multipliers: np.ndarray
    gap: float = float("nan")
    verified: bool = False


@dataclass
class SolveStats:
    pivots: int = 0
    nodes: int = 0
    wall_time: float = 0.0


@dataclass
class SolveResult:
    status: Status
    witness: np.ndarray | None = None
    certificate: Certificate | None = None
    stats: SolveStats = field(default_factory=SolveStats)
    leaf_certificates: list = field(default_factory=list)

    @property
    def feasible(self) -> bool:
        return self.status is Status.FEASIBLE
