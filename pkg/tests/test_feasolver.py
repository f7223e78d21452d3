import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lipinval.feasolver import (LinearProgram, MilfProblem, Status, TAU_CERT, certificate_gap,
                                dumps, loads, lp_feasible, max_violation, milf_feasible,
                                verify_certificate, verify_milf_witness, verify_witness)
from lipinval.selftest import enumerate_binaries, vertex_violation

INF = math.inf


def free_lp(n):
    return LinearProgram(n, [-INF] * n, [INF] * n)


def random_box_lp(rng, n, rows, box=2.0):
    lo = rng.uniform(-box, 0.0, n)
    hi = lo + rng.uniform(0.1, box, n)
    lp = LinearProgram(n, lo, hi)
    for _ in range(rows):
        a = rng.normal(size=n)
        center = rng.uniform(lo, hi)
        rel = ["<=", ">=", "<="][rng.integers(3)]
        offset = rng.normal(scale=0.8)
        lp.add_constraint(dict(enumerate(a)), rel, float(a @ center + offset))
    return lp


def test_interval_feasible():
    lp = free_lp(1)
    lp.add_constraint({0: 1.0}, ">=", 1.0)
    lp.add_constraint({0: 1.0}, "<=", 2.0)
    res = lp_feasible(lp)
    assert res.status is Status.FEASIBLE
    assert 1.0 - 1e-7 <= res.witness[0] <= 2.0 + 1e-7


def test_empty_interval_has_unit_certificate():
    lp = free_lp(1)
    lp.add_constraint({0: 1.0}, ">=", 1.0)
    lp.add_constraint({0: 1.0}, "<=", 0.0)
    res = lp_feasible(lp)
    assert res.status is Status.INFEASIBLE
    np.testing.assert_allclose(res.certificate.multipliers, [1.0, 1.0])
    assert res.certificate.gap == pytest.approx(1.0)
    assert verify_certificate(lp, res.certificate.multipliers)


def test_no_constraints_is_feasible():
    lp = LinearProgram(3, [-1, -INF, 2], [1, 5, 2])
    res = lp_feasible(lp)
    assert res.feasible and verify_witness(lp, res.witness)


def test_equality_rows():
    lp = free_lp(2)
    lp.add_constraint({0: 1, 1: 1}, "==", 3)
    lp.add_constraint({0: 1, 1: -1}, "==", 1)
    res = lp_feasible(lp)
    assert res.feasible
    np.testing.assert_allclose(res.witness, [2, 1], atol=1e-9)
    lp.add_constraint({0: 1}, "<=", 1.5)
    res = lp_feasible(lp)
    assert res.status is Status.INFEASIBLE and res.certificate.verified


def test_nonfinite_data_rejected():
    lp = free_lp(1)
    with pytest.raises(ValueError):
        lp.add_constraint({0: math.nan}, "<=", 1.0)
    with pytest.raises(ValueError):
        lp.add_constraint({0: 1.0}, "<=", math.inf)
    with pytest.raises(ValueError):
        lp.add_constraint({3: 1.0}, "<=", 1.0)


def test_pivot_cap_reports_iteration_limit():
    rng = np.random.default_rng(3)
    lp = random_box_lp(rng, 3, 8)
    res = lp_feasible(lp)
    if res.stats.pivots == 0:
        pytest.skip("instance needed no pivots")
    capped = lp_feasible(lp, max_pivots=0)
    assert capped.status is Status.ITERATION_LIMIT


def test_random_lps_match_vertex_enumeration():
    rng = np.random.default_rng(20240101)
    checked = feasible = 0
    while checked < 100:
        n = int(rng.integers(1, 4))
        lp = random_box_lp(rng, n, int(rng.integers(1, 6)))
        viol = vertex_violation(lp)
        if 1e-12 < viol < 1e-6:
            continue  # too close to the boundary to call
        expected = viol <= 1e-12
        res = lp_feasible(lp)
        assert (res.status is Status.FEASIBLE) == expected
        if expected:
            assert verify_witness(lp, res.witness)
            feasible += 1
        else:
            assert verify_certificate(lp, res.certificate.multipliers)
        checked += 1
    assert 10 < feasible < 90


def test_milf_without_binaries_matches_lp():
    rng = np.random.default_rng(5)
    for _ in range(30):
        lp = random_box_lp(rng, 3, 4)
        a, b = lp_feasible(lp), milf_feasible(MilfProblem(lp, []))
        assert a.status == b.status
        if a.feasible:
            np.testing.assert_array_equal(a.witness, b.witness)


def test_milf_forced_binary_infeasible():
    lp = LinearProgram(2, [0, 0], [INF, 1])
    lp.add_constraint({0: 1, 1: -10}, "<=", 0)
    lp.add_constraint({0: 1}, ">=", 0.5)
    lp.add_constraint({1: 1}, "<=", 0)
    res = milf_feasible(MilfProblem(lp, [1], big_m=10), keep_certificates=True)
    assert res.status is Status.INFEASIBLE
    assert res.leaf_certificates
    for _, cert in res.leaf_certificates:
        assert cert.verified


def test_milf_needs_integrality():
    # LP relaxation is feasible only at b = 0.5.
    lp = LinearProgram(1, [0], [1])
    lp.add_constraint({0: 2}, "==", 1)
    res = milf_feasible(MilfProblem(lp, [0]))
    assert res.status is Status.INFEASIBLE
    assert res.stats.nodes >= 1


def random_milf(rng, k, n_cont):
    n = k + n_cont
    lo = np.concatenate([np.zeros(k), rng.uniform(-2, 0, n_cont)])
    hi = np.concatenate([np.ones(k), rng.uniform(0.1, 2, n_cont)])
    lp = LinearProgram(n, lo, hi)
    big_m = 5.0
    for _ in range(int(rng.integers(2, 8))):
        a = np.zeros(n)
        a[k:] = rng.normal(size=n_cont)
        b = rng.normal(scale=0.5)
        rel = "<=" if rng.random() < 0.7 else ">="
        if k and rng.random() < 0.6:
            j = int(rng.integers(k))
            # Big-M row active only when binary j is 1 (or 0).
            if rng.random() < 0.5:
                a[j] = big_m if rel == "<=" else -big_m
                b = b + big_m
            else:
                a[j] = -big_m if rel == "<=" else big_m
        lp.add_constraint(dict(enumerate(a)), rel, float(b))
    if k >= 2 and rng.random() < 0.5:
        sel = rng.choice(k, size=2, replace=False)
        lp.add_constraint({int(sel[0]): 1, int(sel[1]): 1}, "==", 1)
    return MilfProblem(lp, list(range(k)), big_m)


def test_random_milfs_match_enumeration():
    rng = np.random.default_rng(77)
    feasible = 0
    for _ in range(120):
        k = int(rng.integers(0, 7))
        prob = random_milf(rng, k, int(rng.integers(1, 5)))
        expected = enumerate_binaries(prob, lambda lp: lp_feasible(lp).feasible)
        res = milf_feasible(prob)
        assert res.feasible == expected
        if expected:
            feasible += 1
            assert verify_milf_witness(prob, res.witness)
    assert 10 < feasible < 110


def test_random_milfs_against_vertex_oracle():
    rng = np.random.default_rng(99)
    checked = 0
    while checked < 40:
        prob = random_milf(rng, int(rng.integers(1, 4)), int(rng.integers(1, 3)))
        viols = []
        enumerate_binaries(prob, lambda lp: viols.append(vertex_violation(lp)) or False)
        best = min(viols) if viols else math.inf
        if 1e-12 < best < 1e-6:
            continue
        assert milf_feasible(prob).feasible == (best <= 1e-12)
        checked += 1


def test_node_limit():
    lp = LinearProgram(6, [0] * 6, [1] * 6)
    lp.add_constraint({i: 2.0 for i in range(6)}, "==", 5.0)  # odd sum of even terms
    res = milf_feasible(MilfProblem(lp, list(range(6))), max_nodes=3)
    assert res.status is Status.ITERATION_LIMIT
    full = milf_feasible(MilfProblem(lp, list(range(6))))
    assert full.status is Status.INFEASIBLE


def test_deterministic():
    rng = np.random.default_rng(8)
    prob = random_milf(rng, 5, 3)
    a, b = milf_feasible(prob), milf_feasible(prob)
    assert a.status == b.status and a.stats.nodes == b.stats.nodes
    if a.feasible:
        np.testing.assert_array_equal(a.witness, b.witness)


def test_lpdump_roundtrip(tmp_path):
    rng = np.random.default_rng(11)
    prob = random_milf(rng, 3, 2)
    prob.lp.lo[3] = -INF
    text = dumps(prob)
    back = loads(text)
    assert isinstance(back, MilfProblem)
    assert back.binary_vars == prob.binary_vars
    assert back.lp.lo == prob.lp.lo and back.lp.hi == prob.lp.hi
    for c1, c2 in zip(back.lp.constraints, prob.lp.constraints):
        assert c1.coeffs == c2.coeffs and c1.rel == c2.rel and c1.rhs == c2.rhs
    assert milf_feasible(back).status == milf_feasible(prob).status


def test_lpdump_bad_line():
    with pytest.raises(ValueError, match="line 2"):
        loads("vars 1\n3*y0 <= 1\n")


def test_certificate_verifier_rejects_bad_multipliers():
    lp = free_lp(1)
    lp.add_constraint({0: 1.0}, ">=", 1.0)
    lp.add_constraint({0: 1.0}, "<=", 0.0)
    assert not verify_certificate(lp, [1.0, 0.0])
    assert not verify_certificate(lp, [-1.0, 1.0])
    assert certificate_gap(lp, [2.0, 2.0]) == pytest.approx(2.0)


@st.composite
def small_lps(draw):
    n = draw(st.integers(1, 4))
    rows = draw(st.integers(0, 6))
    coef = st.floats(-5, 5, allow_nan=False).map(lambda v: round(v, 3))
    lo = [draw(st.floats(-3, 0)) for _ in range(n)]
    hi = [l + draw(st.floats(0, 3)) for l in lo]
    lp = LinearProgram(n, lo, hi)
    for _ in range(rows):
        a = {i: draw(coef) for i in range(n)}
        lp.add_constraint(a, draw(st.sampled_from(["<=", ">=", "=="])), draw(coef))
    return lp


@settings(max_examples=150, deadline=None)
@given(small_lps())
def test_answers_are_always_checkable(lp):
    res = lp_feasible(lp)
    if res.feasible:
        assert max_violation(lp, res.witness) <= 1e-7
    else:
        assert res.status is Status.INFEASIBLE
        assert res.certificate.verified
        assert certificate_gap(lp, res.certificate.multipliers) > TAU_CERT
