"""Lipschitz-interpolation envelopes built from a regressor dataset.

For each output ``i`` the upper envelope is the pointwise minimum over data
pairs of ``y'_j[i] + L[i] * |s - s_j|_p`` and the lower envelope the mirrored
maximum, both inflated by the total error ``eps_t[i]``.  If the data were
generated by an ``L``-Lipschitz map with the stated noise bounds, the two
envelopes sandwich that map on the output domain.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .dataset import RegressorDataset, epsilon_s


@dataclass(frozen=True)
class LipschitzVector:
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=float, ndmin=1)
        if vals.ndim != 1 or np.any(~np.isfinite(vals)) or np.any(vals <= 0):
            raise ValueError("Lipschitz constants must be positive and finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return self.values.shape[0]


@dataclass(frozen=True)
class Abstraction:
    data: RegressorDataset
    lip: LipschitzVector
    eps_t: np.ndarray
    p: float

    @property
    def m(self) -> int:
        return self.data.m

    @property
    def n(self) -> int:
        return self.data.n

    @property
    def L(self) -> np.ndarray:
        return self.lip.values

    def subset(self, indices) -> "Abstraction":
        """Abstraction over a subset of the data pairs (same L and eps_t)."""
        sub = self.data.subset(indices)
        if len(sub) == 0:
            raise ValueError("subset must keep at least one pair")
        return Abstraction(sub, self.lip, self.eps_t, self.p)


def total_error(data: RegressorDataset, lip: LipschitzVector) -> np.ndarray:
    eps_s = epsilon_s(data.noise, data.n_y, data.p)
    return data.noise.eps_w + data.noise.eps_v + lip.values * eps_s


def build_abstraction(data: RegressorDataset, lip) -> Abstraction:
    if len(data) == 0:
        raise ValueError("cannot build an abstraction from an empty regressor dataset")
    if not isinstance(lip, LipschitzVector):
        lip = LipschitzVector(lip)
    if len(lip) != data.m:
        raise ValueError(f"expected {data.m} Lipschitz constants, got {len(lip)}")
    eps_t = total_error(data, lip)
    eps_t.setflags(write=False)
    return Abstraction(data, lip, eps_t, data.p)


def envelope(a: Abstraction, points) -> tuple[np.ndarray, np.ndarray]:
    """Upper and lower envelopes at each row of ``points``, shape ``(q, m)`` each."""
    Q = np.asarray(points, dtype=float).reshape(-1, a.n)
    return kernels.envelope(a.data.S, a.data.Y, a.L, a.eps_t, Q, a.p)


def eval_upper(a: Abstraction, s) -> np.ndarray:
    return envelope(a, s)[0][0]


def eval_lower(a: Abstraction, s) -> np.ndarray:
    return envelope(a, s)[1][0]


@dataclass
class ConsistencyReport:
    """Grid points where the lower envelope exceeds the upper one."""

    crossings: list = field(default_factory=list)  # (point index, output index, gap)

    @property
    def ok(self) -> bool:
        return not self.crossings

    def __len__(self):
        return len(self.crossings)


def check_consistency(a: Abstraction, grid) -> ConsistencyReport:
    """Report envelope crossings on ``grid``.

    A crossing means the supplied Lipschitz constants or noise bounds are too
    small to explain the data.
    """
    upper, lower = envelope(a, grid)
    gap = lower - upper
    rows, cols = np.nonzero(gap > 0)
    return ConsistencyReport([(int(r), int(c), float(gap[r, c])) for r, c in zip(rows, cols)])
