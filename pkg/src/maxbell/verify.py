"""Integral inequalities for the tree maximal operator, evaluated on step
functions, plus random checks of the scalar inequalities their proof uses."""
from __future__ import annotations

import numpy as np

from .bellman import a0, coefficients_18
from .maximal import GapReport, maximal_values
from .tree import StepFunction, exact_sum, integrate


def _check(p, q, beta, q_open=False):
    if not p > 1:
        raise ValueError(f"p must exceed 1, got {p}")
    if q_open:
        if not 1 < q < p:
            raise ValueError(f"q must lie in (1,p), got q={q}, p={p}")
    elif not 1 <= q <= p:
        raise ValueError(f"q must lie in [1,p], got q={q}, p={p}")
    if beta < 0:
        raise ValueError(f"beta must be nonnegative, got {beta}")


def tree_integrals(phi: StepFunction, p: float, q: float) -> dict:
    """``f``, ``F``, ``int (Mphi)^p`` and ``k_q = int phi^q (Mphi)^(p-q)``."""
    n = phi.config.n_leaves
    M = maximal_values(phi)
    v = phi.values
    return {
        "f": integrate(phi),
        "F": exact_sum(v**p) / n,
        "maximal_p": exact_sum(M**p) / n,
        "k_q": exact_sum(v**q * M ** (p - q)) / n,
    }


def ineq_18_report(phi: StepFunction, p: float, q: float, beta: float) -> GapReport:
    _check(p, q, beta)
    c1, c2 = coefficients_18(p, q, beta)
    comp = tree_integrals(phi, p, q)
    comp.update(c1=c1, c2=c2)
    return GapReport.make(
        comp["maximal_p"],
        -c1 * comp["f"] ** p + c2 * comp["k_q"],
        comp,
        {"p": p, "q": q, "beta": beta},
    )


def ineq_41_report(phi: StepFunction, p: float, q: float, beta: float) -> GapReport:
    """``k_q >= A0 int (Mphi)^p + (q/p) (beta+1)^(1-q) f^p``.

    Stored with the smaller side as ``lhs`` so that ``gap = rhs - lhs >= 0``.
    """
    _check(p, q, beta, q_open=True)
    comp = tree_integrals(phi, p, q)
    A0 = a0(beta, p, q)
    J = (q / p) * (beta + 1) ** (1 - q) * comp["f"] ** p
    comp.update(a0=A0, J=J, c2=coefficients_18(p, q, beta)[1])
    return GapReport.make(A0 * comp["maximal_p"] + J, comp["k_q"], comp, {"p": p, "q": q, "beta": beta})


def theorem_a_report(phi: StepFunction, p: float) -> GapReport:
    """The ``q = 1``, ``beta = 1/(p-1)`` case."""
    return ineq_18_report(phi, p, 1.0, 1.0 / (p - 1))


# ------------------------------------------------------ scalar inequalities


def holder_sum_slack(lam, sigma, q):
    """``sum lam_i^q / sigma_i^(q-1) - (sum lam)^q / (sum sigma)^(q-1)``."""
    lam = np.asarray(lam, dtype=np.float64)
    sigma = np.asarray(sigma, dtype=np.float64)
    return exact_sum(lam**q / sigma ** (q - 1)) - lam.sum() ** q / sigma.sum() ** (q - 1)


def young_slack(x, y, p, q):
    """``q x^p + (p-q) y^p - p x^q y^(p-q)``."""
    return q * x**p + (p - q) * y**p - p * x**q * y ** (p - q)


def mean_value_slack(x, beta, q):
    """``((beta+1) - beta x)^(1-q) - (beta+1)^(1-q) - (q-1) beta x / (beta+1)^q``."""
    b = beta + 1
    return (b - beta * x) ** (1 - q) - b ** (1 - q) - (q - 1) * beta * x / b**q


def elementary_oracles(sample_count: int, seed: int = 0) -> dict:
    """Draw random arguments for the three scalar inequalities and report the
    worst slack of each, normalized by ``max(1, |larger side|)``."""
    if sample_count < 1:
        raise ValueError("sample_count must be at least 1")
    rng = np.random.default_rng(seed)
    worst = {"holder": np.inf, "young": np.inf, "mean_value": np.inf}
    for _ in range(sample_count):
        p = rng.uniform(1.05, 6.0)
        q = rng.uniform(1.0, p)
        beta = rng.uniform(0.0, 3.0)
        m = int(rng.integers(1, 9))
        lam = rng.exponential(1.0, m)
        sigma = rng.uniform(1e-3, 1.0, m)
        s = holder_sum_slack(lam, sigma, q)
        scale = max(1.0, exact_sum(lam**q / sigma ** (q - 1)))
        worst["holder"] = min(worst["holder"], s / scale)

        x, y = rng.uniform(1e-3, 3.0, 2)
        s = young_slack(x, y, p, q)
        worst["young"] = min(worst["young"], s / max(1.0, q * x**p + (p - q) * y**p))

        x = rng.uniform(0.0, 1.0)
        s = mean_value_slack(x, beta, q)
        worst["mean_value"] = min(worst["mean_value"], s / max(1.0, (beta + 1 - beta * x) ** (1 - q)))
    return {
        "samples": sample_count,
        "seed": seed,
        "worst": {k: float(v) for k, v in worst.items()},
        "ok": all(v >= -1e-12 for v in worst.values()),
    }
