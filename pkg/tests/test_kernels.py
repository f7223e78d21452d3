import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lipinval import kernels

BACKENDS = kernels.backends()


def test_backend_selected():
    assert kernels.BACKEND in BACKENDS
    assert "numpy" in BACKENDS


def random_problem(seed, p):
    rng = np.random.default_rng(seed)
    N, n, m, q = rng.integers(1, 30), rng.integers(1, 5), rng.integers(1, 4), rng.integers(1, 20)
    S = rng.normal(size=(N, n))
    Y = rng.normal(size=(N, m))
    L = rng.uniform(0.1, 3, m)
    eps_t = rng.uniform(0, 0.2, m)
    Q = rng.normal(size=(q, n))
    return S, Y, L, eps_t, Q, p


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([1.0, 2.0, math.inf]))
def test_backends_agree_on_envelopes(seed, p):
    args = random_problem(seed, p)
    ref_u, ref_l = BACKENDS["numpy"].envelope(*args)
    for mod in BACKENDS.values():
        u, l = mod.envelope(*args)
        np.testing.assert_allclose(u, ref_u, rtol=1e-13, atol=1e-13)
        np.testing.assert_allclose(l, ref_l, rtol=1e-13, atol=1e-13)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([1.0, 2.0, math.inf]))
def test_backends_agree_on_slopes(seed, p):
    S, Y, _, _, _, _ = random_problem(seed, p)
    rng = np.random.default_rng(seed + 1)
    eps_v = rng.uniform(0, 0.1, Y.shape[1])
    ref = BACKENDS["numpy"].pairwise_slope_max(S, Y, eps_v, 0.05, p)
    for mod in BACKENDS.values():
        best, unbounded = mod.pairwise_slope_max(S, Y, eps_v, 0.05, p)
        np.testing.assert_allclose(best, ref[0], rtol=1e-13, atol=1e-15)
        np.testing.assert_array_equal(unbounded, ref[1])


@pytest.mark.parametrize("p", [1.0, 2.0, math.inf])
def test_distances(p):
    rng = np.random.default_rng(0)
    S = rng.normal(size=(7, 3))
    Q = rng.normal(size=(4, 3))
    expected = np.array([[np.linalg.norm(q - s, ord=p) for s in S] for q in Q])
    for mod in BACKENDS.values():
        got = np.array([mod.distances(S, q, p) for q in Q])
        np.testing.assert_allclose(got, expected, rtol=1e-13)
        assert mod.distances(S[:0], Q[0], p).shape == (0,)


def test_pure_backend_can_be_forced():
    import os
    import subprocess
    import sys

    env = {**os.environ, "LIPINVAL_PURE": "1"}
    out = subprocess.run([sys.executable, "-c", "from lipinval import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
