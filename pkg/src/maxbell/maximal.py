"""Tree maximal operator on step functions and its linearization.

For a leaf ``x`` the maximal value is the largest average over the cells
containing ``x``. Among the cells attaining it, the one closest to the root
is the cell that owns ``x`` in the linearization; the owning cells form the
support, and ``a_measure`` records how much of each support cell it owns.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .tree import NodeId, StepFunction, TreeConfig, exact_sum, integrate, power_integral


@dataclass(frozen=True)
class GapReport:
    """One inequality instance. ``gap = rhs - lhs`` is nonnegative when it holds."""

    lhs: float
    rhs: float
    gap: float
    components: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)

    @classmethod
    def make(cls, lhs, rhs, components=None, params=None) -> "GapReport":
        lhs, rhs = float(lhs), float(rhs)
        return cls(lhs, rhs, rhs - lhs, dict(components or {}), dict(params or {}))

    def to_dict(self) -> dict:
        return {
            "lhs": self.lhs,
            "rhs": self.rhs,
            "gap": self.gap,
            "components": {k: float(v) for k, v in self.components.items()},
            "params": dict(self.params),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _pass(phi: StepFunction):
    cached = phi.__dict__.get("_maximal_pass")
    if cached is None:
        m, d = phi.config.arity, phi.config.depth
        best, lvl = kernels.maximal_pass(phi.node_averages, m, d)
        best.setflags(write=False)
        lvl.setflags(write=False)
        cached = (best, lvl)
        phi.__dict__["_maximal_pass"] = cached
    return cached


def maximal_values(phi: StepFunction) -> np.ndarray:
    """Leafwise maximal function as a bare array (cached on ``phi``)."""
    return _pass(phi)[0]


def maximal_function(phi: StepFunction) -> StepFunction:
    return StepFunction(phi.config, maximal_values(phi))


def maximal_function_bruteforce(phi: StepFunction) -> np.ndarray:
    """Reference: for every level, average each cell's leaves with
    ``math.fsum`` and take the leafwise max over all ancestors."""
    m, d = phi.config.arity, phi.config.depth
    vals = phi.values
    n = vals.size
    out = np.full(n, -np.inf)
    for k in range(d + 1):
        w = m ** (d - k)
        avgs = np.array([exact_sum(vals[a : a + w]) / w for a in range(0, n, w)])
        out = np.maximum(out, np.repeat(avgs, w))
    return out


@dataclass(frozen=True)
class Linearization:
    """Support cells stored as parallel arrays, root first, ordered by
    (level, index). ``star[i]`` is the position of the smallest support cell
    strictly containing cell ``i`` (``-1`` for the root); ``owner[x]`` is the
    support position owning leaf ``x``."""

    config: TreeConfig
    levels: np.ndarray
    indices: np.ndarray
    y: np.ndarray
    a_measure: np.ndarray
    mu: np.ndarray
    star: np.ndarray
    owner: np.ndarray

    def __len__(self):
        return self.levels.size

    def node(self, i: int) -> NodeId:
        return NodeId.from_index(int(self.levels[i]), int(self.indices[i]), self.config.arity)

    @property
    def support(self) -> list:
        return [self.node(i) for i in range(len(self))]

    @property
    def averages(self) -> dict:
        return {self.node(i): float(self.y[i]) for i in range(len(self))}

    @property
    def a_measures(self) -> dict:
        return {self.node(i): float(self.a_measure[i]) for i in range(len(self))}

    @property
    def star_map(self) -> dict:
        return {self.node(i): self.node(int(self.star[i])) for i in range(1, len(self))}

    def reconstruct(self) -> np.ndarray:
        """Leafwise sum of ``y_I`` over the owned sets."""
        return self.y[self.owner]

    def to_dict(self) -> dict:
        m = self.config.arity
        names = [self.node(i).to_str(m) for i in range(len(self))]
        return {
            "arity": m,
            "depth": self.config.depth,
            "support": names,
            "y": {nm: float(v) for nm, v in zip(names, self.y)},
            "aMeasure": {nm: float(v) for nm, v in zip(names, self.a_measure)},
            "star": {names[i]: names[int(self.star[i])] for i in range(1, len(names))},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def linearize(phi: StepFunction) -> Linearization:
    cfg = phi.config
    m, d, n = cfg.arity, cfg.depth, cfg.n_leaves
    best, lvl = _pass(phi)
    avgs = phi.node_averages

    widths = np.array([m ** (d - k) for k in range(d + 1)], dtype=np.int64)
    offsets = np.array([kernels.level_offset(m, k) for k in range(d + 1)], dtype=np.int64)
    leaf = np.arange(n, dtype=np.int64)
    keys = offsets[lvl] + leaf // widths[lvl]

    support_keys = np.unique(np.concatenate([[0], keys]))
    owner = np.searchsorted(support_keys, keys)
    y = avgs[support_keys]
    # every leaf's supremum is attained by its owning ancestor
    if not np.array_equal(y[owner], best):
        raise AssertionError("maximal value not attained by the owning cell")

    levels = np.searchsorted(offsets, support_keys, side="right") - 1
    indices = support_keys - offsets[levels]
    a_measure = np.bincount(owner, minlength=support_keys.size) / n
    mu = float(m) ** (-levels.astype(np.float64))

    star = np.full(support_keys.size, -1, dtype=np.int64)
    pending = np.arange(1, support_keys.size)
    for up in range(1, d + 1):
        if pending.size == 0:
            break
        lv = levels[pending] - up
        ok = lv >= 0
        pending = pending[ok]
        lv = lv[ok]
        anc = offsets[lv] + indices[pending] // (np.int64(m) ** up)
        pos = np.searchsorted(support_keys, anc)
        pos = np.minimum(pos, support_keys.size - 1)
        hit = support_keys[pos] == anc
        star[pending[hit]] = pos[hit]
        pending = pending[~hit]
    return Linearization(cfg, levels, indices, y, a_measure, mu, star, owner)


def weak_type_gap(phi: StepFunction, lam: float) -> GapReport:
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    M = maximal_values(phi)
    mask = M > lam
    n = phi.config.n_leaves
    level_set = np.count_nonzero(mask) / n
    mass = exact_sum(phi.values[mask]) / n
    return GapReport.make(
        level_set,
        mass / lam,
        {"level_set_measure": level_set, "level_set_integral": mass},
        {"lambda": lam},
    )


def lp_bound_gap(phi: StepFunction, p: float) -> GapReport:
    if not p > 1:
        raise ValueError(f"p must exceed 1, got {p}")
    M = maximal_values(phi)
    mp = exact_sum(M**p) / phi.config.n_leaves
    F = power_integral(phi, p)
    return GapReport.make(
        mp ** (1 / p),
        p / (p - 1) * F ** (1 / p),
        {"maximal_p": mp, "F": F, "f": integrate(phi)},
        {"p": p},
    )


def _slack_arrays(lin: Linearization, phi: StepFunction, q: float, beta: float) -> np.ndarray:
    n = lin.config.n_leaves
    owned_q = np.bincount(lin.owner, weights=phi.values**q, minlength=len(lin)) / n
    rho = lin.a_measure / lin.mu
    tau = (beta + 1.0) - beta * rho
    child = np.bincount(
        lin.star[1:], weights=lin.mu[1:] * lin.y[1:] ** q, minlength=len(lin)
    )
    bound = lin.mu * lin.y**q / tau ** (q - 1) - child / (beta + 1.0) ** (q - 1)
    return owned_q - bound


def linearization_slack(phi: StepFunction, q: float, beta: float, p: float) -> dict:
    """Per support cell, the amount by which the owned ``q``-integral exceeds
    the relaxed lower bound used on the way to the (q, beta) inequality."""
    if not p > 1:
        raise ValueError(f"p must exceed 1, got {p}")
    if not 1 <= q <= p:
        raise ValueError(f"q must lie in [1, p], got q={q}, p={p}")
    if beta < 0:
        raise ValueError(f"beta must be nonnegative, got {beta}")
    lin = linearize(phi)
    s = _slack_arrays(lin, phi, q, beta)
    return {lin.node(i): float(s[i]) for i in range(len(lin))}


def weighted_slack_total(phi: StepFunction, q: float, beta: float, p: float) -> float:
    """``sum_I y_I^(p-q) * slack(I)``."""
    lin = linearize(phi)
    s = _slack_arrays(lin, phi, q, beta)
    return exact_sum(lin.y ** (p - q) * s)
