import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from maxbell import (
    GapReport,
    NodeId,
    StepFunction,
    TreeConfig,
    integrate,
    linearization_slack,
    linearize,
    lp_bound_gap,
    maximal_function,
    maximal_function_bruteforce,
    weak_type_gap,
)
from maxbell.maximal import weighted_slack_total
from maxbell.suites import linearization_checks

from conftest import step_functions


def sf(m, d, vals):
    return StepFunction(TreeConfig(m, d), vals)


def test_maximal_examples():
    assert maximal_function(sf(2, 3, [1.7] * 8)).values.tolist() == [1.7] * 8
    assert maximal_function(sf(2, 1, [2, 0])).values.tolist() == [2, 1]
    assert maximal_function(sf(2, 2, [4, 0, 0, 0])).values.tolist() == [4, 2, 1, 1]


def test_linearize_constant():
    lin = linearize(sf(3, 2, [2.5] * 9))
    assert lin.support == [NodeId()]
    assert lin.a_measures == {NodeId(): 1.0}
    assert lin.averages == {NodeId(): 2.5}
    assert lin.star_map == {}


def test_linearize_two_leaves():
    lin = linearize(sf(2, 1, [2, 0]))
    assert lin.support == [NodeId(), NodeId((0,))]
    assert lin.averages == {NodeId(): 1.0, NodeId((0,)): 2.0}
    assert lin.a_measures == {NodeId(): 0.5, NodeId((0,)): 0.5}
    assert lin.owner.tolist() == [1, 0]


def test_linearize_spike():
    lin = linearize(sf(2, 2, [4, 0, 0, 0]))
    n0, n00 = NodeId((0,)), NodeId((0, 0))
    assert lin.support == [NodeId(), n0, n00]
    assert lin.a_measures == {NodeId(): 0.5, n0: 0.25, n00: 0.25}
    assert lin.averages == {NodeId(): 1.0, n0: 2.0, n00: 4.0}
    assert lin.star_map == {n00: n0, n0: NodeId()}


def test_linearization_json_schema():
    lin = linearize(sf(2, 2, [4, 0, 0, 0]))
    obj = json.loads(lin.to_json())
    assert set(obj) >= {"support", "y", "aMeasure", "star"}
    assert obj["support"] == ["", "0", "00"]
    assert obj["star"] == {"0": "", "00": "0"}
    assert obj["aMeasure"] == {"": 0.5, "0": 0.25, "00": 0.25}


def test_tie_break_prefers_largest_cell():
    # leaf 0 average 1 equals the root average: the root owns it
    lin = linearize(sf(2, 1, [1, 1]))
    assert lin.support == [NodeId()]
    lin = linearize(sf(2, 2, [2, 2, 0, 0]))
    # node (0,) has average 2, leaves 00 and 01 tie with it: node (0,) owns both
    assert lin.support == [NodeId(), NodeId((0,))]


@given(step_functions())
def test_maximal_matches_bruteforce(phi):
    M = maximal_function(phi).values
    assert np.array_equal(M, maximal_function_bruteforce(phi))
    assert np.all(M >= phi.values)
    assert np.all(M >= integrate(phi) * (1 - 1e-15))


@given(step_functions())
def test_linearization_invariants(phi):
    for k, margin in linearization_checks(phi).items():
        assert margin >= 0, k
    lin = linearize(phi)
    assert np.array_equal(lin.reconstruct(), maximal_function(phi).values)
    assert np.all(lin.y >= integrate(phi) * (1 - 1e-15))
    # owned leaves lie inside their owner
    m, d = phi.config.arity, phi.config.depth
    w = m ** (d - lin.levels[lin.owner])
    assert np.array_equal(np.arange(m**d) // w, lin.indices[lin.owner])


@given(step_functions(max_depth=4))
def test_nonleaf_support_has_child_outside(phi):
    """Every non-leaf support cell has a child that is not in the support."""
    lin = linearize(phi)
    keys = {(int(l), int(i)) for l, i in zip(lin.levels, lin.indices)}
    m, d = phi.config.arity, phi.config.depth
    for l, i in keys:
        if l < d:
            assert any((l + 1, i * m + c) not in keys for c in range(m))


def test_weak_type_examples():
    r = weak_type_gap(sf(2, 3, [2.0] * 8), 2.0)
    assert (r.lhs, r.rhs) == (0.0, 0.0)
    r = weak_type_gap(sf(2, 2, [4, 0, 0, 0]), 1.5)
    assert r.lhs == 0.5 and r.rhs == pytest.approx(2 / 3, rel=1e-15)
    with pytest.raises(ValueError):
        weak_type_gap(sf(2, 1, [1, 1]), 0.0)


def test_lp_bound_examples():
    r = lp_bound_gap(sf(2, 2, [3.0] * 4), 2)
    assert r.lhs == 3.0 and r.rhs == 6.0
    r = lp_bound_gap(sf(2, 1, [2, 0]), 2)
    assert r.lhs == pytest.approx(math.sqrt(2.5), rel=1e-15)
    assert r.rhs == pytest.approx(2 * math.sqrt(2), rel=1e-15)


@given(step_functions(), st.floats(0.01, 60.0), st.sampled_from([1.5, 2.0, 3.0]))
def test_classical_bounds(phi, lam, p):
    assert weak_type_gap(phi, lam).gap >= -1e-12
    assert lp_bound_gap(phi, p).gap >= -1e-12


def _slack_oracle(phi, q, beta):
    """Direct transcription over NodeIds and leaf loops."""
    lin = linearize(phi)
    m, d = phi.config.arity, phi.config.depth
    n = m**d
    nodes = lin.support
    out = {}
    for i, I in enumerate(nodes):
        owned = [x for x in range(n) if lin.owner[x] == i]
        aI = len(owned) / n
        muI = m ** (-I.level)
        yI = phi.average(I)
        tau = (beta + 1) - beta * aI / muI
        children = [J for J in lin.star_map if lin.star_map[J] == I]
        child = sum(m ** (-J.level) * phi.average(J) ** q for J in children) / (beta + 1) ** (q - 1)
        own_q = math.fsum(phi.values[x] ** q for x in owned) / n
        out[I] = own_q - (muI * yI**q / tau ** (q - 1) - child)
    return out


def test_slack_constant_is_zero():
    s = linearization_slack(sf(2, 3, [1.3] * 8), 1.5, 0.7, 2.0)
    assert s == {NodeId(): pytest.approx(0.0, abs=1e-15)}


def test_slack_two_leaves_oracle():
    phi = sf(2, 1, [2, 0])
    s = linearization_slack(phi, 2.0, 0.5, 2.0)
    ref = _slack_oracle(phi, 2.0, 0.5)
    assert set(s) == set(ref)
    for k in s:
        assert s[k] >= 0
        assert s[k] == pytest.approx(ref[k], rel=1e-13, abs=1e-15)


@given(step_functions(max_depth=3), st.floats(1.01, 3.0), st.floats(0.01, 3.0))
def test_slack_matches_oracle_and_nonnegative(phi, q, beta):
    s = linearization_slack(phi, q, beta, max(q, 3.0))
    ref = _slack_oracle(phi, q, beta)
    lin = linearize(phi)
    for i, node in enumerate(lin.support):
        scale = max(1.0, lin.mu[i] * lin.y[i] ** q)
        assert s[node] == pytest.approx(ref[node], abs=1e-12 * scale)
        if lin.a_measure[i] > 0:
            assert s[node] >= -1e-12 * scale


def test_slack_argument_checks():
    phi = sf(2, 1, [1, 2])
    with pytest.raises(ValueError):
        linearization_slack(phi, 3.0, 0.5, 2.0)
    with pytest.raises(ValueError):
        linearization_slack(phi, 1.5, -0.1, 2.0)


def test_weighted_slack_equals_weighted_sum():
    phi = sf(3, 3, np.linspace(3, 0, 27) ** 2)
    s = linearization_slack(phi, 1.5, 0.5, 2.0)
    lin = linearize(phi)
    total = math.fsum(phi.average(k) ** 0.5 * v for k, v in s.items())
    assert weighted_slack_total(phi, 1.5, 0.5, 2.0) == pytest.approx(total, rel=1e-12)
    assert lin.averages.keys() == s.keys()


def test_gap_report_serialization():
    r = GapReport.make(1.0, 3.5, {"f": 1.0}, {"p": 2.0})
    assert r.gap == 2.5
    assert json.loads(r.to_json()) == {"lhs": 1.0, "rhs": 3.5, "gap": 2.5, "components": {"f": 1.0}, "params": {"p": 2.0}}
