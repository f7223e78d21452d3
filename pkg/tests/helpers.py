"""Shared builders for the test modules."""

import numpy as np

from lipinval.abstraction import build_abstraction
from lipinval.dataset import build_regressor_dataset, make_dataset


def pair_dataset(S, Y, eps_w=0.0, eps_v=0.0, lower=-100.0, upper=100.0, p="inf"):
    """Scalar regressor dataset with one length-2 trajectory per pair."""
    trajs = [np.array([[s], [y]]) for s, y in zip(S, Y)]
    data = make_dataset(trajs, n_y=1, eps_w=[eps_w], eps_v=[eps_v], lower=[lower], upper=[upper], p=p)
    return build_regressor_dataset(data)


def pair_abstraction(S, Y, L, **kw):
    return build_abstraction(pair_dataset(S, Y, **kw), [L])


def cos_abstraction(p="inf", count=50, eps=0.1, L=1.0, seed=0):
    """Noisy cos samples on [0, 2pi] as a scalar abstraction; returns (abstraction, rng)."""
    rng = np.random.default_rng(seed)
    x = np.linspace(0.0, 2 * np.pi, count)
    s = x + rng.uniform(-eps, eps, count)
    y = np.cos(x) + rng.uniform(-eps, eps, count) + rng.uniform(-eps, eps, count)
    return pair_abstraction(s, y, L, eps_w=eps, eps_v=eps, lower=-3.0, upper=8.0, p=p), rng
