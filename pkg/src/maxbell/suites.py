"""Randomized invariant suites shared by ``maxbell selftest`` and ``verify``.

Every suite takes a ``numpy.random.Generator`` (or none, for grid suites)
and returns a :class:`SuiteResult`. Worst values are signed so that a
suite passes when ``worst >= 0`` after its tolerance has been subtracted.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bellman import a0, coefficients_18, beta_balance_sides, h_p, omega_p, solve_beta
from .hardy import PowerLaw, geometric_alpha_grid, ineq_110_report, sharpness_sweep
from .maximal import (
    linearize,
    lp_bound_gap,
    maximal_function_bruteforce,
    maximal_values,
    weak_type_gap,
    weighted_slack_total,
    _slack_arrays,
)
from .tree import Rearranged, StepFunction, TreeConfig, exact_sum, integrate
from .verify import elementary_oracles, ineq_18_report, ineq_41_report


@dataclass
class SuiteResult:
    name: str
    count: int
    failures: int = 0
    worst: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.failures == 0

    def note(self, key: str, margin: float, tol_ok: bool):
        """Record a signed margin (negative means violated) for ``key``."""
        self.worst[key] = min(self.worst.get(key, math.inf), float(margin))
        if not tol_ok:
            self.failures += 1

    def to_dict(self) -> dict:
        return {"name": self.name, "count": self.count, "failures": self.failures, "ok": self.ok,
                "worst": {k: self.worst[k] for k in sorted(self.worst)}}


# ------------------------------------------------------------------ corpus


def random_step_function(rng, max_arity: int = 4, max_depth: int = 6, min_depth: int = 0) -> StepFunction:
    """Mix of smooth, sparse, tied and heavy-tailed leaf values."""
    m = int(rng.integers(2, max_arity + 1))
    d = int(rng.integers(min_depth, max_depth + 1))
    n = m**d
    kind = int(rng.integers(0, 4))
    if kind == 0:
        v = rng.exponential(1.0, n)
    elif kind == 1:
        v = rng.exponential(1.0, n) * (rng.random(n) < 0.3)
    elif kind == 2:
        v = rng.integers(0, 4, n).astype(np.float64)
    else:
        v = rng.lognormal(0.0, 1.5, n)
    if not np.any(v > 0):
        v[int(rng.integers(n))] = 1.0
    return StepFunction(TreeConfig(m, d), v)


def random_profile(rng, max_segments: int = 8) -> Rearranged:
    """Nonincreasing step profile with random breakpoints."""
    k = int(rng.integers(1, max_segments + 1))
    cuts = np.sort(rng.uniform(0.0, 1.0, k - 1))
    bps = np.unique(np.concatenate([cuts[cuts > 0], [1.0]]))
    vals = np.sort(rng.exponential(1.0, bps.size))[::-1]
    return Rearranged(bps, vals)


def random_pqb(rng):
    p = float(rng.uniform(1.2, 5.0))
    q = float(rng.uniform(1.0, p))
    beta = float(rng.uniform(0.0, 3.0))
    return p, q, max(beta, 1e-6)


# ------------------------------------------------------------------ suites


def suite_maximal_oracle(rng, count: int = 500) -> SuiteResult:
    res = SuiteResult("maximal_oracle", count)
    for _ in range(count):
        phi = random_step_function(rng)
        M = maximal_values(phi)
        same = np.array_equal(M, maximal_function_bruteforce(phi))
        res.note("exact_match", 0.0 if same else -1.0, same)
        ok = bool(np.all(M >= phi.values)) and bool(np.all(M >= phi.node_averages[0]))
        res.note("dominates", 0.0 if ok else -1.0, ok)
    return res


def linearization_checks(phi: StepFunction) -> dict:
    """Signed margins (``>= 0`` is good) for the linearization invariants."""
    lin = linearize(phi)
    M = maximal_values(phi)
    m = phi.config.arity
    out = {}
    out["partition"] = 1e-14 - abs(exact_sum(lin.a_measure) - 1.0)
    child_mu = np.bincount(lin.star[1:], weights=lin.mu[1:], minlength=len(lin))
    out["a_measure_identity"] = 1e-14 - float(np.max(np.abs(lin.a_measure - (lin.mu - child_mu))))
    out["reconstruction"] = 0.0 if np.array_equal(lin.reconstruct(), M) else -1.0
    d = phi.config.depth
    width = np.int64(m) ** (d - lin.levels)
    lo = lin.indices * width
    hi = lo + width
    leaf = np.arange(phi.config.n_leaves)
    # (i): each leaf is owned by the deepest support cell containing it
    deepest = np.zeros(leaf.size, dtype=np.int64)
    for i in range(1, len(lin)):
        deepest[lo[i] : hi[i]] = np.where(lin.levels[i] > lin.levels[deepest[lo[i] : hi[i]]], i, deepest[lo[i] : hi[i]])
    out["owned_inside"] = 0.0 if np.array_equal(deepest, lin.owner) else -1.0
    # (iii): each support cell is the union of the owned sets inside it
    inside = (lo[:, None] <= lo[None, :]) & (hi[None, :] <= hi[:, None])  # [i, j]: j inside i
    covered = inside.astype(np.float64) @ lin.a_measure
    out["cell_union"] = 1e-14 - float(np.max(np.abs(covered - lin.mu)))
    strict = inside & (lin.levels[:, None] < lin.levels[None, :])
    lv = np.where(strict, lin.levels[:, None], -1)
    want = np.argmax(lv, axis=0)
    ok_star = np.array_equal(want[1:], lin.star[1:]) and not np.any(strict[:, 0])
    out["star_minimal"] = 0.0 if ok_star else -1.0
    return out


def suite_linearization(rng, count: int = 500) -> SuiteResult:
    res = SuiteResult("linearization", count)
    for _ in range(count):
        phi = random_step_function(rng, max_arity=4, max_depth=5)
        for k, v in linearization_checks(phi).items():
            res.note(k, v, v >= 0)
        p, q, beta = random_pqb(rng)
        q = max(q, 1.0 + 1e-9)
        lin = linearize(phi)
        s = _slack_arrays(lin, phi, q, beta)
        scale = np.maximum(1.0, lin.mu * lin.y**q)
        live = lin.a_measure > 0
        margin = float(np.min(s[live] / scale[live] + 1e-12)) if np.any(live) else 0.0
        res.note("slack_nonnegative", margin, margin >= 0)
    return res


def suite_inversion(ps=(1.2, 1.5, 2.0, 3.0, 5.0), grid: int = 1000) -> SuiteResult:
    zs = np.linspace(1.0 / grid, 1.0, grid)
    res = SuiteResult("inversion", grid * len(ps))
    for p in ps:
        prev = math.inf
        for z in zs:
            w = omega_p(float(z), p)
            err = abs(h_p(w, p) - z)
            res.note("residual", 1e-10 - err, err <= 1e-10)
            ok = 1.0 <= w <= p / (p - 1) and w <= prev
            res.note("bracket_monotone", 0.0 if ok else -1.0, ok)
            prev = w
            if p == 2.0:
                e2 = abs(w - (1.0 + math.sqrt(1.0 - z)))
                res.note("closed_form_p2", 1e-12 - e2, e2 <= 1e-12)
    return res


def suite_inequalities(rng, count: int = 10000) -> SuiteResult:
    """(q, beta) inequality, its equivalent form, and the slack domination."""
    res = SuiteResult("inequalities", count)
    for i in range(count):
        phi = random_step_function(rng, max_depth=5)
        p, q, beta = random_pqb(rng)
        r18 = ineq_18_report(phi, p, q, beta)
        tol = 1e-11 * max(1.0, abs(r18.rhs))
        res.note("gap18", (r18.gap + tol) / max(1.0, abs(r18.rhs)), r18.gap >= -tol)
        if 1 < q < p:
            r41 = ineq_41_report(phi, p, q, beta)
            c2 = r41.components["c2"]
            scale = max(1.0, abs(r18.lhs), abs(r18.rhs))
            err = abs(r41.gap * c2 - r18.gap) / scale
            res.note("equivalence", 1e-10 - err, err <= 1e-10)
            if i % 10 == 0:
                w = weighted_slack_total(phi, q, beta, p)
                res.note("slack_dominated", r41.gap + 1e-10 - w, w <= r41.gap + 1e-10)
    return res


def suite_coefficients() -> SuiteResult:
    ps = (1.2, 1.5, 2.0, 3.0, 5.0)
    res = SuiteResult("coefficients", 0)
    for p in ps:
        for q in np.linspace(1.0, p, 7):
            for beta in (0.01, 0.1, 0.5, 1.0, 1.0 / (p - 1), 2.0, 3.0):
                if q == p and beta == 0:
                    continue
                c1, c2 = coefficients_18(p, float(q), beta)
                e1 = abs(a0(beta, p, float(q)) * c2 - 1.0)
                e2 = abs(c1 - c2 * (q / p) * (beta + 1) ** (1 - q)) / max(1.0, c1)
                res.note("a0_c2", 1e-12 - e1, e1 <= 1e-12)
                res.note("c1_identity", 1e-12 - e2, e2 <= 1e-12)
                res.count += 1
    return res


def suite_hardy_q1(rng, count: int = 100, ps=(1.5, 2.0, 3.0)) -> SuiteResult:
    res = SuiteResult("hardy_q1", count * len(ps))
    for _ in range(count):
        g = random_profile(rng)
        for p in ps:
            gap = ineq_110_report(g, p, 1.0, 1.0 / (p - 1)).gap
            res.note("abs_gap", 1e-9 - abs(gap), abs(gap) <= 1e-9)
    return res


def suite_powerlaw(p_values=(1.5, 2.0, 3.0, 4.0)) -> SuiteResult:
    res = SuiteResult("powerlaw_gap", 0)
    for p in p_values:
        for q in np.linspace(1.0, p, 6)[1:-1]:
            for frac in (0.1, 0.3, 0.5, 0.7, 0.9):
                beta = frac / (p - 1)
                for f in (0.5, 1.0, 2.0):
                    c = ineq_110_report(PowerLaw.from_beta(f, beta), p, float(q), beta).components
                    err = abs(c["residual_41"] - c["J"])
                    res.note("residual_minus_J", 1e-9 - err, err <= 1e-9)
                    res.count += 1
    return res


def suite_sharpness(pairs=((2.0, 2.0), (3.0, 1.5), (1.5, 1.2))) -> SuiteResult:
    res = SuiteResult("sharpness", 0)
    for p, q in pairs:
        lim = q / (p - 1)
        rows = sharpness_sweep(p, q, geometric_alpha_grid(p, 12, 1e-6))
        errs = [abs(G - lim) for _, G in rows]
        dec = all(b < a for a, b in zip(errs, errs[1:]))
        res.note("strictly_decreasing", 0.0 if dec else -1.0, dec)
        rel = errs[-1] / lim
        res.note("final_relative", 1e-3 - rel, rel <= 1e-3)
        res.count += len(rows)
    return res


def suite_beta_balance(rng, count: int = 100) -> SuiteResult:
    res = SuiteResult("beta_balance", count)
    for _ in range(count):
        p = float(rng.uniform(1.2, 5.0))
        f = float(rng.uniform(0.1, 3.0))
        F = f**p * float(rng.uniform(1.0, 50.0))
        beta = solve_beta(f, F, p)
        w = omega_p(min(1.0, f**p / F), p)
        e = abs(beta + 1 - w)
        res.note("beta_plus_one", 1e-10 - e, e <= 1e-10)
        for q in np.linspace(1.0, p, 5):
            lhs, rhs = beta_balance_sides(beta, f, F, p, float(q))
            rel = abs(lhs - rhs) / max(abs(lhs), abs(rhs))
            res.note("balance", 1e-10 - rel, rel <= 1e-10)
    return res


def suite_classics(rng, count: int = 500) -> SuiteResult:
    res = SuiteResult("classics", count)
    for _ in range(count):
        phi = random_step_function(rng)
        M = maximal_values(phi)
        lams = list(rng.uniform(0.05, 1.2, 3) * float(M.max())) + [float(rng.choice(M))]
        for lam in lams:
            g = weak_type_gap(phi, lam).gap
            res.note("weak_type", g + 1e-12, g >= -1e-12)
        for p in (1.5, 2.0, 3.0):
            g = lp_bound_gap(phi, p).gap
            res.note("lp_bound", g + 1e-12, g >= -1e-12)
    return res


def suite_elementary(samples: int, seed: int) -> SuiteResult:
    rep = elementary_oracles(samples, seed)
    res = SuiteResult("elementary", samples)
    for k, v in rep["worst"].items():
        res.note(k, v + 1e-12, v >= -1e-12)
    return res


def run_all(seed: int = 0, samples: int = 1000) -> list[SuiteResult]:
    """Every suite, each with its own child generator so results do not
    depend on suite order."""
    seqs = np.random.SeedSequence(seed).spawn(7)
    g = [np.random.default_rng(s) for s in seqs]
    return [
        suite_maximal_oracle(g[0], min(samples, 500)),
        suite_linearization(g[1], min(samples, 200)),
        suite_inversion(),
        suite_coefficients(),
        suite_inequalities(g[2], samples),
        suite_hardy_q1(g[3], min(samples, 100)),
        suite_powerlaw(),
        suite_sharpness(),
        suite_beta_balance(g[4], min(samples, 100)),
        suite_classics(g[5], min(samples, 500)),
        suite_elementary(samples, int(g[6].integers(2**31))),
    ]
