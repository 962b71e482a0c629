import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from maxbell import (
    NodeId,
    Rearranged,
    StepFunction,
    TreeConfig,
    decreasing_rearrangement,
    integrate,
    make_tree,
    node_measure,
    power_integral,
)
from maxbell.tree import distribution

from conftest import step_functions


@pytest.mark.parametrize("m,d,n", [(2, 0, 1), (2, 2, 4), (3, 2, 9)])
def test_make_tree_leaf_counts(m, d, n):
    cfg = make_tree(m, d)
    assert cfg.n_leaves == n
    assert cfg.leaf_measure == 1 / n
    for k in range(d + 1):
        assert math.fsum([cfg.level_measure(k)] * m**k) == 1.0


@pytest.mark.parametrize("m,d", [(1, 3), (0, 1), (2, -1), (2.5, 2)])
def test_make_tree_rejects_bad_shapes(m, d):
    with pytest.raises(ValueError):
        make_tree(m, d)


def test_leaf_budget(monkeypatch):
    with pytest.raises(ValueError, match="leaf budget"):
        make_tree(2, 25)
    monkeypatch.setenv("MAXBELL_MAX_LEAVES", "16")
    make_tree(2, 4)
    with pytest.raises(ValueError, match="leaf budget"):
        make_tree(2, 5)


def test_node_measure():
    assert node_measure(make_tree(2, 3), NodeId()) == 1.0
    assert node_measure(make_tree(2, 3), NodeId((1,))) == 0.5
    assert node_measure(make_tree(3, 3), NodeId((2, 0))) == pytest.approx(1 / 9, rel=1e-15)
    with pytest.raises(ValueError):
        node_measure(make_tree(2, 1), NodeId((0, 0)))
    with pytest.raises(ValueError):
        node_measure(make_tree(2, 2), NodeId((2,)))


def test_node_id_roundtrips():
    for m in (2, 3, 12):
        for lvl in range(4):
            for i in range(m**lvl):
                node = NodeId.from_index(lvl, i, m)
                assert node.index(m) == i
                assert NodeId.parse(node.to_str(m), m) == node
    assert NodeId((0, 1)).parent() == NodeId((0,))
    assert NodeId((0,)).contains(NodeId((0, 1)))
    assert not NodeId((1,)).contains(NodeId((0, 1)))


def test_integrate_examples():
    assert integrate(StepFunction.constant(make_tree(3, 2), 3.0)) == 3.0
    assert integrate(StepFunction(make_tree(2, 1), [2, 0])) == 1.0
    assert integrate(StepFunction(make_tree(2, 2), [4, 0, 0, 0])) == 1.0
    assert power_integral(StepFunction(make_tree(2, 1), [2, 0]), 2) == 2.0
    assert power_integral(StepFunction.constant(make_tree(2, 3), 1.5), 3.0) == 1.5**3


def test_step_function_validation():
    cfg = make_tree(2, 1)
    for bad in ([1.0], [1.0, -1.0], [1.0, float("nan")], [1.0, float("inf")]):
        with pytest.raises(ValueError):
            StepFunction(cfg, bad)
    with pytest.raises(ValueError):
        power_integral(StepFunction(cfg, [1, 1]), 0.5)


def test_power_integral_matches_midpoint_rule(rng):
    phi = StepFunction(make_tree(3, 4), rng.exponential(1.0, 81))
    # midpoint rule on a grid refining the leaves is exact for step functions;
    # 64 points per leaf with plain summation is an independent path
    t = (np.arange(81 * 64) + 0.5) / (81 * 64)
    leaf = np.floor(t * 81).astype(int)
    for r in (1.0, 1.5, 2.0, 3.7):
        midpoint = np.sum(phi.values[leaf] ** r) / t.size
        assert abs(power_integral(phi, r) - midpoint) <= 1e-12 * max(1, midpoint)


def test_rearrangement_examples():
    r = decreasing_rearrangement(StepFunction.constant(make_tree(2, 3), 2.0))
    assert r.values.tolist() == [2.0] and r.breakpoints.tolist() == [1.0]
    r = decreasing_rearrangement(StepFunction(make_tree(2, 1), [0, 2]))
    assert r.breakpoints.tolist() == [0.5, 1.0]
    assert r.values.tolist() == [2.0, 0.0]


def test_json_roundtrip(rng):
    phi = StepFunction(make_tree(3, 2), rng.random(9))
    back = StepFunction.from_json(phi.to_json())
    assert back.config == phi.config and np.array_equal(back.values, phi.values)
    with pytest.raises(ValueError):
        StepFunction.from_json('{"arity": 2, "depth": 1, "values": [1, 2, 3]}')
    with pytest.raises(ValueError):
        StepFunction.from_json('{"arity": 2, "values": [1, 2]}')


def test_rearranged_validation():
    with pytest.raises(ValueError):
        Rearranged([0.5, 0.9], [2, 1])
    with pytest.raises(ValueError):
        Rearranged([0.5, 1.0], [1, 2])
    with pytest.raises(ValueError):
        Rearranged([0.5, 0.5, 1.0], [3, 2, 1])
    g = Rearranged.from_steps([(0.25, 2.0), (1.0, 2 / 3)])
    assert g.integral() == pytest.approx(1.0, abs=1e-15)
    assert g.cell_averages(4).tolist() == [2.0, 2 / 3, 2 / 3, 2 / 3]
    np.testing.assert_allclose(g.cell_averages(2), [(0.5 + 0.25 * 2 / 3) * 2, 2 / 3], rtol=1e-15)


@given(step_functions())
def test_rearrangement_preserves_integrals(phi):
    r = decreasing_rearrangement(phi)
    assert np.all(np.diff(r.values) < 0)
    assert r.integral() == integrate(phi)
    for p in (1.0, 1.5, 2.0, 3.0):
        assert r.power_integral(p) == power_integral(phi, p)


@given(step_functions(), st.lists(st.floats(0.0, 60.0), min_size=1, max_size=20))
def test_equimeasurability(phi, lams):
    r = decreasing_rearrangement(phi)
    for lam in lams + list(phi.values[:5]):
        assert r.distribution(lam) == distribution(phi, lam)


def test_equimeasurability_random_levels(rng):
    for _ in range(20):
        phi = StepFunction(make_tree(2, 7), rng.integers(0, 6, 128) * rng.random())
        r = decreasing_rearrangement(phi)
        for lam in rng.uniform(0, phi.values.max() * 1.1, 100):
            assert r.distribution(lam) == distribution(phi, lam)


@given(step_functions(max_depth=4))
def test_node_integrals_consistent_across_levels(phi):
    m, d = phi.config.arity, phi.config.depth
    for k in range(d):
        parent = phi.level_averages(k)
        child = phi.level_averages(k + 1).reshape(-1, m).mean(axis=1)
        np.testing.assert_allclose(parent, child, rtol=1e-14, atol=1e-14)
    for k in range(d + 1):
        lvl = phi.level_averages(k)
        w = m ** (d - k)
        ref = [math.fsum(phi.values[i * w : (i + 1) * w]) / w for i in range(m**k)]
        assert lvl.tolist() == ref
