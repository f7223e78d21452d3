import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import cos_abstraction, pair_abstraction, pair_dataset
from lipinval.abstraction import (LipschitzVector, build_abstraction, check_consistency, envelope, eval_lower,
                                  eval_upper)
from lipinval.dataset import build_regressor_dataset, epsilon_s, make_dataset
from lipinval.lipschitz import estimate_lipschitz
from lipinval.swarmsim import SwarmConfig, build_dataset


def test_total_error_examples():
    a = build_abstraction(pair_dataset([0.0], [0.0], eps_w=0.1, eps_v=0.1), [1.0])
    assert a.eps_t[0] == pytest.approx(0.3, abs=1e-15)
    a = build_abstraction(pair_dataset([0.0], [0.0]), [7.5])
    assert a.eps_t[0] == 0.0


def test_total_error_swarm():
    reg = build_regressor_dataset(build_dataset(SwarmConfig(), 3, seed=1))
    lip = estimate_lipschitz(reg)
    a = build_abstraction(reg, lip)
    eps_v = np.array(reg.noise.eps_v)
    eps_s = float(np.max(eps_v))  # max-norm of the regressor noise box, n_y = 1
    expected = np.array(reg.noise.eps_w) + eps_v + lip * eps_s
    np.testing.assert_allclose(a.eps_t, expected, rtol=0, atol=1e-15)


def test_single_pair_values():
    a = pair_abstraction([0.0], [1.0], 1.0, eps_w=0.3)
    # eps_t = eps_w here, so the envelope is 1 +- (0.3 + |s|)
    assert eval_upper(a, [0.0])[0] == pytest.approx(1.3)
    assert eval_lower(a, [0.0])[0] == pytest.approx(0.7)
    assert eval_upper(a, [2.0])[0] == pytest.approx(3.3)


def test_tent_functions():
    a = pair_abstraction([0.0, 2.0], [0.0, 0.0], 1.0)
    assert eval_upper(a, [1.0])[0] == 1.0
    assert eval_lower(a, [1.0])[0] == -1.0


@pytest.mark.parametrize("p", ["inf", "1"])
def test_cos_sandwich(p):
    a, _ = cos_abstraction(p)
    grid = np.linspace(0, 2 * np.pi, 1000)
    upper, lower = envelope(a, grid)
    assert np.all(lower[:, 0] <= np.cos(grid))
    assert np.all(np.cos(grid) <= upper[:, 0])


def test_brute_force_envelope_matches():
    rng = np.random.default_rng(3)
    S = rng.normal(size=(20, 2))
    Y = rng.normal(size=(20, 2))
    data = make_dataset([np.vstack([s, y]) for s, y in zip(S, Y)], eps_w=[0.01, 0.02], eps_v=[0.0, 0.03],
                        lower=[-9, -9], upper=[9, 9], p="1")
    a = build_abstraction(build_regressor_dataset(data), [0.7, 1.9])
    Q = rng.normal(size=(30, 2))
    upper, lower = envelope(a, Q)
    for q, u, l in zip(Q, upper, lower):
        dist = [math.fsum(abs(q - s)) for s in S]
        for i in range(2):
            assert u[i] == pytest.approx(min(Y[j, i] + a.L[i] * dist[j] for j in range(20)) + a.eps_t[i], abs=1e-12)
            assert l[i] == pytest.approx(max(Y[j, i] - a.L[i] * dist[j] for j in range(20)) - a.eps_t[i], abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(["1", "2", "inf"]), st.integers(0, 10**6))
def test_envelopes_are_lipschitz(p, seed):
    rng = np.random.default_rng(seed)
    data = make_dataset([rng.normal(size=(6, 2)) for _ in range(3)], n_y=2, eps_w=[0.1, 0.0],
                        eps_v=[0.05, 0.02], lower=[-5, -5], upper=[5, 5], p=p)
    L = rng.uniform(0.1, 3.0, 2)
    a = build_abstraction(build_regressor_dataset(data), L)
    A = rng.normal(size=(40, 4))
    B = rng.normal(size=(40, 4))
    ua, la = envelope(a, A)
    ub, lb = envelope(a, B)
    dist = np.linalg.norm(A - B, ord=a.p, axis=1)
    for i in range(2):
        assert np.all(np.abs(ua[:, i] - ub[:, i]) <= L[i] * dist + 1e-9)
        assert np.all(np.abs(la[:, i] - lb[:, i]) <= L[i] * dist + 1e-9)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_subset_monotonicity(seed):
    a, rng = cos_abstraction(seed=seed % 1000, count=25)
    keep = np.flatnonzero(rng.random(len(a.data)) < 0.5)
    if keep.size == 0:
        keep = np.array([0])
    sub = a.subset(keep)
    grid = np.linspace(-1, 7, 50)
    u, l = envelope(a, grid)
    us, ls = envelope(sub, grid)
    assert np.all(us >= u) and np.all(ls <= l)


def test_consistency_reports():
    x = np.linspace(0, 2 * np.pi, 60)
    grid = np.linspace(0, 2 * np.pi, 200)
    assert check_consistency(pair_abstraction(x, np.cos(x), 1.0), grid).ok
    bad = check_consistency(pair_abstraction(x, np.cos(x), 0.01), grid)
    assert not bad.ok and len(bad) > 0
    assert all(gap > 0 for _, _, gap in bad.crossings)
    lone = pair_abstraction([0.3], [5.0], 0.2)
    assert check_consistency(lone, np.linspace(-50, 50, 101)).ok


def test_rejections():
    with pytest.raises(ValueError):
        LipschitzVector([0.0])
    with pytest.raises(ValueError):
        LipschitzVector([math.inf])
    with pytest.raises(ValueError):
        build_abstraction(pair_dataset([], []), [1.0])
    with pytest.raises(ValueError):
        build_abstraction(pair_dataset([0.0], [0.0]), [1.0, 2.0])


def test_eps_t_uses_regressor_noise_norm():
    reg = pair_dataset([0.0], [0.0], eps_v=0.2, p="1")
    a = build_abstraction(reg, [2.0])
    assert a.eps_t[0] == pytest.approx(0.2 + 2.0 * epsilon_s(reg.noise, 1, "1"))
