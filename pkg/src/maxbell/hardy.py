"""Hardy averages of nonincreasing profiles and the power-law extremal family.

On a step profile the Hardy average restricted to segment ``(a, b]`` with
value ``v`` is ``v + C/t`` where ``C = P(a) - v a`` and ``P`` is the running
integral. Powers of it are integrated per segment: closed form when ``v`` or
``C`` vanishes, adaptive Gauss-Kronrod (QUADPACK) otherwise, with the summed
error estimate held under ``QUAD_TOL``.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate as _spi

from .bellman import a0, coefficients_18
from .maximal import GapReport
from .tree import Rearranged, exact_sum

QUAD_TOL = 1e-10


@dataclass(frozen=True)
class PowerLaw:
    """``g(t) = c * t**(-alpha)`` on (0, 1]."""

    c: float
    alpha: float

    def __post_init__(self):
        if self.c < 0:
            raise ValueError(f"scale must be nonnegative, got {self.c}")
        if not 0 <= self.alpha < 1:
            raise ValueError(f"exponent must lie in [0, 1), got {self.alpha}")

    @classmethod
    def from_beta(cls, f: float, beta: float) -> "PowerLaw":
        alpha = beta / (beta + 1)
        return cls(f * (1 - alpha), alpha)

    @classmethod
    def from_alpha(cls, f: float, alpha: float) -> "PowerLaw":
        return cls(f * (1 - alpha), alpha)

    def __call__(self, t):
        return self.c * np.asarray(t, dtype=np.float64) ** (-self.alpha)

    def integral(self) -> float:
        return self.c / (1 - self.alpha)

    def in_lp(self, p: float) -> bool:
        return self.alpha * p < 1

    def cell_averages(self, n_cells: int) -> np.ndarray:
        """Average over each ``(i/n, (i+1)/n]``, computed without cancellation."""
        if self.alpha == 0:
            return np.full(n_cells, float(self.c))
        s = 1.0 - self.alpha
        scale = self.c / s * n_cells
        i = np.arange(n_cells, dtype=np.float64)
        out = np.empty(n_cells)
        out[0] = scale * (1.0 / n_cells) ** s
        ii = i[1:]
        out[1:] = scale * (ii / n_cells) ** s * np.expm1(s * np.log1p(1.0 / ii))
        return out


def hardy_average(g, t):
    """``(1/t) * integral_0^t g``."""
    t_arr = np.asarray(t, dtype=np.float64)
    if np.any(t_arr <= 0) or np.any(t_arr > 1):
        raise ValueError("t must lie in (0, 1]")
    if isinstance(g, PowerLaw):
        out = g.c * t_arr ** (-g.alpha) / (1 - g.alpha)
    else:
        P = g.prefix_integrals()
        k = np.minimum(np.searchsorted(g.breakpoints, t_arr, side="left"), g.values.size - 1)
        out = (P[k] + g.values[k] * (t_arr - g.left_ends[k])) / t_arr
    return float(out) if np.ndim(out) == 0 else out


def powerlaw_lp_integral(g: PowerLaw, p: float) -> float:
    if not g.in_lp(p):
        raise ValueError(f"alpha*p = {g.alpha * p} >= 1: profile is not in L^{p}")
    return g.c**p / (1 - g.alpha * p)


def _segment_power(v, C, a, b, e):
    """``integral_a^b (v + C/t)^e dt`` and its error estimate."""
    if e == 0:
        return b - a, 0.0
    if C == 0:
        return v**e * (b - a), 0.0
    if v == 0:
        if e == 1:
            return C * math.log(b / a), 0.0
        return C**e * (b ** (1 - e) - a ** (1 - e)) / (1 - e), 0.0
    val, err = _spi.quad(
        lambda t: (v + C / t) ** e, a, b, epsabs=1e-14, epsrel=1e-13, limit=200
    )
    return val, err


def step_hardy_integrals(g: Rearranged, p: float, q: float) -> tuple[float, float, float]:
    """``(int (Hg)^p, int (Hg)^(p-q) g^q, error estimate)`` for a step profile."""
    P = g.prefix_integrals()
    left = g.left_ends
    hp, hk, err = [], [], 0.0
    for k, v in enumerate(g.values):
        a, b = left[k], g.breakpoints[k]
        C = max(P[k] - v * a, 0.0)
        if a == 0:
            # first segment: Hg = v on (0, b]
            hp.append(v**p * b)
            hk.append(v**p * b)
            continue
        x, ex = _segment_power(v, C, a, b, p)
        hp.append(x)
        err += ex
        if v == 0:
            hk.append(0.0)
        else:
            y, ey = _segment_power(v, C, a, b, p - q)
            hk.append(v**q * y)
            err += v**q * ey
    if err > QUAD_TOL:
        raise RuntimeError(f"quadrature error estimate {err:.3g} exceeds {QUAD_TOL}")
    return exact_sum(hp), exact_sum(hk), err


def ineq_110_report(g, p: float, q: float, beta: float) -> GapReport:
    """Hardy-type form of the (q, beta) inequality on a nonincreasing profile.

    Besides the main gap, ``components`` carries both sharpness conventions:
    ``residual_41 = k - A0 L`` (equal to ``J`` for the matched power law) and
    ``J_alpha = L - c2 k`` (equal to ``-f^p G(alpha)`` when beta = 1/(p-1)).
    """
    if not p > 1:
        raise ValueError(f"p must exceed 1, got {p}")
    if not 1 <= q <= p:
        raise ValueError(f"q must lie in [1,p], got q={q}, p={p}")
    if beta < 0:
        raise ValueError(f"beta must be nonnegative, got {beta}")
    c1, c2 = coefficients_18(p, q, beta)
    if isinstance(g, PowerLaw):
        if not g.in_lp(p):
            raise ValueError(f"alpha*p = {g.alpha * p} >= 1: profile is not in L^{p}")
        gp = powerlaw_lp_integral(g, p)
        f = g.integral()
        L = gp / (1 - g.alpha) ** p
        k = gp / (1 - g.alpha) ** (p - q)
        err = 0.0
    else:
        f = g.integral()
        L, k, err = step_hardy_integrals(g, p, q)
    fp = f**p
    J = (q / p) * (beta + 1) ** (1 - q) * fp
    residual_41 = k - a0(beta, p, q) * L
    return GapReport.make(
        L,
        -c1 * fp + c2 * k,
        {
            "f": f,
            "hardy_p": L,
            "k_q": k,
            "c1": c1,
            "c2": c2,
            "residual_41": residual_41,
            "J": J,
            "gap_41": residual_41 - J,
            "J_alpha": L - c2 * k,
            "quad_err": err,
        },
        {"p": p, "q": q, "beta": beta},
    )


def sharpness_g(alpha, p: float, q: float):
    """``((p/(p-1))^q (1-alpha)^q - 1) / (1 - alpha p)`` without cancellation."""
    a = np.asarray(alpha, dtype=np.float64)
    if np.any(a <= 0) or np.any(a >= 1 / p):
        raise ValueError("alpha must lie in (0, 1/p)")
    delta = 1.0 - a * p
    out = np.expm1(q * np.log1p(delta / (p - 1))) / delta
    return float(out) if np.ndim(out) == 0 else out


def sharpness_sweep(p: float, q: float, alphas) -> list[tuple[float, float]]:
    if not p > 1 or not 1 <= q <= p:
        raise ValueError(f"need p > 1 and q in [1,p], got p={p}, q={q}")
    alphas = np.asarray(alphas, dtype=np.float64)
    G = np.atleast_1d(sharpness_g(alphas, p, q))
    return [(float(a), float(x)) for a, x in zip(np.atleast_1d(alphas), G)]


def geometric_alpha_grid(p: float, n: int = 12, closest: float = 1e-6) -> np.ndarray:
    """``alpha_k = 1/p - delta_k`` with ``delta_k`` geometric from ``1/(2p)`` to ``closest``."""
    deltas = np.geomspace(0.5 / p, closest, n)
    return 1.0 / p - deltas


def beta_sweep(p: float, q: float, betas, f: float = 1.0) -> list[tuple[float, float, float]]:
    """For the matched power law ``g_beta``: ``(beta, residual_41 / f^p, J / f^p)``."""
    rows = []
    for b in np.asarray(betas, dtype=np.float64):
        if not 0 < b < 1 / (p - 1):
            raise ValueError(f"beta must lie in (0, 1/(p-1)), got {b}")
        rep = ineq_110_report(PowerLaw.from_beta(f, b), p, q, b)
        fp = f**p
        rows.append((float(b), rep.components["residual_41"] / fp, rep.components["J"] / fp))
    return rows


def sweep_csv(rows, kind: str = "alpha", limit=None) -> str:
    """CSV text with header ``<kind>,G,limit,abs_err``.

    ``rows`` are ``(x, G)`` pairs with a shared ``limit``, or ``(x, G, limit)``
    triples.
    """
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([kind, "G", "limit", "abs_err"])
    for row in rows:
        x, G = row[0], row[1]
        lim = row[2] if len(row) > 2 else limit
        w.writerow([repr(float(x)), repr(float(G)), repr(float(lim)), repr(abs(float(G) - float(lim)))])
    return buf.getvalue()
