"""Lipschitz constant estimation from noisy pairs and the PAC sample-size bound."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .dataset import RegressorDataset, epsilon_s


class InconsistentDataError(ValueError):
    pass


@dataclass(frozen=True)
class PacParams:
    eps: float
    delta: float

    def __post_init__(self):
        if not 0.0 < self.eps < 1.0:
            raise ValueError("eps must lie in (0, 1)")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")


def stride_indices(count: int, max_pairs: int | None) -> np.ndarray:
    """Deterministic evenly strided subsample of ``range(count)``."""
    if max_pairs is None or count <= max_pairs:
        return np.arange(count)
    if max_pairs < 2:
        raise ValueError("max_pairs must be at least 2")
    return np.unique(np.linspace(0, count - 1, max_pairs).round().astype(np.int64))


def estimate_lipschitz(data: RegressorDataset, max_pairs: int | None = None) -> np.ndarray:
    """Per-output estimate ``max(0, max_{j != k} (|dy| - 2 eps_v[i]) / (|ds|_p + 2 eps_s))``.

    With ``max_pairs`` the estimate runs on a strided subset, which can only
    lower the result.
    """
    if len(data) < 2:
        raise ValueError("Lipschitz estimation needs at least two pairs")
    idx = stride_indices(len(data), max_pairs)
    eps_s = epsilon_s(data.noise, data.n_y, data.p)
    best, unbounded = kernels.pairwise_slope_max(data.S[idx], data.Y[idx], data.noise.eps_v, eps_s, data.p)
    if np.any(unbounded):
        comps = ", ".join(str(i + 1) for i in np.nonzero(unbounded)[0])
        raise InconsistentDataError(
            f"inconsistent data: infinite Lipschitz estimate (output {comps}: identical regressors "
            "with different successors and zero measurement noise)")
    return best


# Relative slack absorbing rounding just above an integer bound.
_CEIL_SLACK = 1e-8


def pac_sample_size(params: PacParams) -> int:
    """Smallest ``N >= (1/eps) ln(1/delta)``, at least 1."""
    bound = (1.0 / params.eps) * math.log(1.0 / params.delta)
    return max(1, math.ceil(bound * (1.0 - _CEIL_SLACK)))
