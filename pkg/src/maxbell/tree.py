"""Homogeneous m-adic tree on (0, 1], step functions on its leaves, and
decreasing rearrangements.

Leaf ``i`` is the cell ``(i / N, (i + 1) / N]`` with ``N = arity ** depth``;
its base-``arity`` digits (most significant first) are the path from the
root. All integrals are exactly rounded sums (``math.fsum``), so they do not
depend on leaf order.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import kernels

DEFAULT_MAX_LEAVES = 2**24


def max_leaves() -> int:
    """Leaf budget, overridable through ``MAXBELL_MAX_LEAVES``."""
    raw = os.environ.get("MAXBELL_MAX_LEAVES")
    return int(raw) if raw else DEFAULT_MAX_LEAVES


def exact_sum(x) -> float:
    return math.fsum(np.asarray(x, dtype=np.float64).ravel().tolist())


@dataclass(frozen=True)
class TreeConfig:
    arity: int
    depth: int

    def __post_init__(self):
        if int(self.arity) != self.arity or self.arity < 2:
            raise ValueError(f"arity must be an integer >= 2, got {self.arity}")
        if int(self.depth) != self.depth or self.depth < 0:
            raise ValueError(f"depth must be an integer >= 0, got {self.depth}")
        cap = max_leaves()
        if self.arity**self.depth > cap:
            raise ValueError(
                f"arity**depth = {self.arity ** self.depth} exceeds the leaf budget {cap} "
                "(raise MAXBELL_MAX_LEAVES to allow more)"
            )

    @property
    def n_leaves(self) -> int:
        return self.arity**self.depth

    @property
    def leaf_measure(self) -> float:
        return 1.0 / self.n_leaves

    def level_measure(self, level: int) -> float:
        return float(self.arity) ** (-level)

    @property
    def root(self) -> "NodeId":
        return NodeId(())


def make_tree(arity: int, depth: int) -> TreeConfig:
    return TreeConfig(arity, depth)


@dataclass(frozen=True, order=True)
class NodeId:
    """A tree cell, addressed by its digit path from the root."""

    digits: tuple = ()

    @property
    def level(self) -> int:
        return len(self.digits)

    def index(self, arity: int) -> int:
        """Left-to-right position of the cell within its level."""
        i = 0
        for dg in self.digits:
            i = i * arity + dg
        return i

    @classmethod
    def from_index(cls, level: int, index: int, arity: int) -> "NodeId":
        digits = []
        for _ in range(level):
            index, dg = divmod(index, arity)
            digits.append(dg)
        return cls(tuple(reversed(digits)))

    def parent(self) -> "NodeId":
        if not self.digits:
            raise ValueError("the root has no parent")
        return NodeId(self.digits[:-1])

    def contains(self, other: "NodeId") -> bool:
        return other.digits[: self.level] == self.digits

    def validate(self, config: TreeConfig) -> None:
        if self.level > config.depth:
            raise ValueError(f"node level {self.level} exceeds tree depth {config.depth}")
        if any(not (0 <= dg < config.arity) for dg in self.digits):
            raise ValueError(f"node digits {self.digits} out of range for arity {config.arity}")

    def to_str(self, arity: int = 10) -> str:
        sep = "" if arity <= 10 else "."
        return sep.join(str(dg) for dg in self.digits)

    @classmethod
    def parse(cls, s: str, arity: int = 10) -> "NodeId":
        if not s:
            return cls(())
        parts = s.split(".") if arity > 10 else list(s)
        return cls(tuple(int(x) for x in parts))

    def __str__(self) -> str:
        return self.to_str()


def node_measure(config: TreeConfig, node: NodeId) -> float:
    node.validate(config)
    return config.level_measure(node.level)


class StepFunction:
    """Nonnegative function constant on each leaf cell of ``config``."""

    def __init__(self, config: TreeConfig, values):
        vals = np.array(values, dtype=np.float64).ravel()
        if vals.size != config.n_leaves:
            raise ValueError(
                f"expected {config.n_leaves} leaf values for arity {config.arity}, "
                f"depth {config.depth}; got {vals.size}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("step function values must be finite")
        if np.any(vals < 0):
            raise ValueError("step function values must be nonnegative")
        vals.setflags(write=False)
        self.config = config
        self.values = vals

    @classmethod
    def constant(cls, config: TreeConfig, value: float) -> "StepFunction":
        return cls(config, np.full(config.n_leaves, float(value)))

    def __repr__(self):
        return f"StepFunction(arity={self.config.arity}, depth={self.config.depth})"

    @cached_property
    def node_sums(self) -> np.ndarray:
        """Sum of leaf values under every node, levels stored flat."""
        s = kernels.node_sums(self.values, self.config.arity, self.config.depth)
        s.setflags(write=False)
        return s

    @cached_property
    def node_averages(self) -> np.ndarray:
        m, d = self.config.arity, self.config.depth
        sizes = np.concatenate([np.full(m**k, float(m ** (d - k))) for k in range(d + 1)])
        a = self.node_sums / sizes
        a.setflags(write=False)
        return a

    def level_averages(self, level: int) -> np.ndarray:
        m = self.config.arity
        off = kernels.level_offset(m, level)
        return self.node_averages[off : off + m**level]

    def average(self, node: NodeId) -> float:
        node.validate(self.config)
        return float(self.level_averages(node.level)[node.index(self.config.arity)])

    def node_integral(self, node: NodeId) -> float:
        return self.average(node) * node_measure(self.config, node)

    def to_json(self) -> str:
        return json.dumps(
            {"arity": self.config.arity, "depth": self.config.depth, "values": self.values.tolist()}
        )

    @classmethod
    def from_json(cls, text: str) -> "StepFunction":
        obj = json.loads(text)
        missing = {"arity", "depth", "values"} - set(obj)
        if missing:
            raise ValueError(f"step function JSON lacks keys {sorted(missing)}")
        return cls(TreeConfig(int(obj["arity"]), int(obj["depth"])), obj["values"])


def integrate(phi: StepFunction) -> float:
    return exact_sum(phi.values) / phi.config.n_leaves


def power_integral(phi: StepFunction, r: float) -> float:
    if r < 1:
        raise ValueError(f"power_integral needs r >= 1, got {r}")
    return exact_sum(phi.values**r) / phi.config.n_leaves


class Rearranged:
    """Nonincreasing step profile on (0, 1].

    Segment ``k`` is ``(breakpoints[k-1], breakpoints[k]]`` with
    ``breakpoints[-1] == 1``. Profiles produced by
    :func:`decreasing_rearrangement` also remember the leaf multiplicity of
    each segment so their integrals reproduce the source sums exactly.
    """

    def __init__(self, breakpoints, values, counts=None, n_cells=None):
        b = np.array(breakpoints, dtype=np.float64).ravel()
        v = np.array(values, dtype=np.float64).ravel()
        if b.size == 0 or b.size != v.size:
            raise ValueError("need one value per segment")
        if b[-1] != 1.0:
            raise ValueError("last breakpoint must be 1")
        if b[0] <= 0 or np.any(np.diff(b) <= 0):
            raise ValueError("breakpoints must be strictly increasing in (0, 1]")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise ValueError("profile values must be finite and nonnegative")
        if np.any(np.diff(v) > 0):
            raise ValueError("profile values must be nonincreasing")
        self.breakpoints = b
        self.values = v
        self.counts = None if counts is None else np.asarray(counts, dtype=np.int64)
        self.n_cells = n_cells
        for arr in (self.breakpoints, self.values):
            arr.setflags(write=False)

    def __repr__(self):
        return f"Rearranged({self.values.size} segments)"

    @classmethod
    def from_steps(cls, pairs) -> "Rearranged":
        """Build from ``[(right_endpoint, value), ...]``."""
        b, v = zip(*pairs)
        return cls(b, v)

    @property
    def lengths(self) -> np.ndarray:
        return np.diff(self.breakpoints, prepend=0.0)

    @property
    def left_ends(self) -> np.ndarray:
        return np.concatenate([[0.0], self.breakpoints[:-1]])

    def power_integral(self, r: float = 1.0) -> float:
        if self.counts is not None:
            return exact_sum(np.repeat(self.values**r, self.counts)) / self.n_cells
        return exact_sum(self.values**r * self.lengths)

    def integral(self) -> float:
        return self.power_integral(1.0)

    def prefix_integrals(self) -> np.ndarray:
        """``P[k] = integral of the profile over (0, breakpoints[k-1]]``, ``P[0] = 0``."""
        return np.concatenate([[0.0], np.cumsum(self.values * self.lengths)])

    def __call__(self, t):
        t = np.asarray(t, dtype=np.float64)
        k = np.searchsorted(self.breakpoints, t, side="left")
        return self.values[np.minimum(k, self.values.size - 1)]

    def distribution(self, lam: float) -> float:
        """Length of ``{profile > lam}``."""
        above = np.nonzero(self.values > lam)[0]
        if above.size == 0:
            return 0.0
        if self.counts is not None:
            return float(np.sum(self.counts[: above[-1] + 1])) / self.n_cells
        return float(self.breakpoints[above[-1]])

    def cell_averages(self, n_cells: int) -> np.ndarray:
        """Average of the profile over each cell ``(i/n, (i+1)/n]``.

        Cells lying inside one segment take the segment value exactly.
        """
        edges = np.arange(n_cells + 1, dtype=np.float64) / n_cells
        lo_seg = np.searchsorted(self.breakpoints, edges[:-1], side="right")
        hi_seg = np.searchsorted(self.breakpoints, edges[1:], side="left")
        lo_seg = np.minimum(lo_seg, self.values.size - 1)
        hi_seg = np.minimum(hi_seg, self.values.size - 1)
        out = self.values[lo_seg].copy()
        straddle = np.nonzero(lo_seg != hi_seg)[0]
        if straddle.size:
            P = self.prefix_integrals()
            left = self.left_ends

            def cumulative(t, seg):
                return P[seg] + self.values[seg] * (t - left[seg])

            a, b = edges[straddle], edges[straddle + 1]
            out[straddle] = (
                cumulative(b, hi_seg[straddle]) - cumulative(a, lo_seg[straddle])
            ) * n_cells
        return out


def decreasing_rearrangement(phi: StepFunction) -> Rearranged:
    n = phi.config.n_leaves
    vals = np.sort(phi.values)[::-1]
    change = np.nonzero(np.diff(vals) != 0)[0]
    ends = np.concatenate([change + 1, [n]])
    counts = np.diff(ends, prepend=0)
    return Rearranged(ends / n, vals[ends - 1], counts=counts, n_cells=n)


def distribution(phi: StepFunction, lam: float) -> float:
    """Measure of ``{phi > lam}``."""
    return float(np.count_nonzero(phi.values > lam)) / phi.config.n_leaves
