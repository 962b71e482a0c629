"""Closed-form constants and the Bellman function of the tree maximal operator."""
from __future__ import annotations

from dataclasses import dataclass

BISECTION_WIDTH = 1e-14


@dataclass(frozen=True)
class Params:
    p: float
    q: float = 1.0
    beta: float = 0.0
    f: float = 1.0
    F: float | None = None
    sharp: bool = False

    def __post_init__(self):
        if not self.p > 1:
            raise ValueError(f"p must exceed 1, got {self.p}")
        if not 1 <= self.q <= self.p:
            raise ValueError(f"q must lie in [1,p], got q={self.q}, p={self.p}")
        if self.beta < 0:
            raise ValueError(f"beta must be nonnegative, got {self.beta}")
        if not self.f > 0:
            raise ValueError(f"f must be positive, got {self.f}")
        if self.F is not None:
            _check_pair(self.f, self.F, self.p)
        if self.sharp and not 0 < self.beta <= 1 / (self.p - 1):
            raise ValueError(f"sharpness mode requires 0 < beta <= 1/(p-1), got beta={self.beta}")


def _check_pair(f, F, p):
    if not f > 0:
        raise ValueError(f"f must be positive, got {f}")
    if f**p > F * (1 + 1e-12):
        raise ValueError(f"requires f^p <= F, got f^p={f ** p}, F={F}")


def h_p(z: float, p: float) -> float:
    """``-(p-1) z^p + p z^(p-1)``, evaluated in factored form."""
    if z < 0:
        raise ValueError(f"h_p needs z >= 0, got {z}")
    return z ** (p - 1) * (p - (p - 1) * z)


def _deficit(u: float, p: float) -> float:
    """``1 - h_p(1 + u)`` without cancellation for small ``u``.

    Uses ``1 - h_p(1+u) = p (p-1) * integral_0^u (1+s)^(p-2) s ds`` expanded
    as a binomial series when ``u < 0.1``.
    """
    if u >= 0.1:
        return 1.0 - h_p(1.0 + u, p)
    total, coef, uk = 0.0, 1.0, u * u
    for k in range(60):
        t = coef * uk / (k + 2)
        total += t
        if abs(t) <= 1e-18 * abs(total):
            break
        coef *= (p - 2 - k) / (k + 1)
        uk *= u
    return p * (p - 1) * total


def omega_p(z: float, p: float) -> float:
    """Inverse of ``h_p`` on ``[1, p/(p-1)]``.

    Bisection to width 1e-14 on ``u = w - 1`` against the deficit
    ``1 - z``, then up to three Newton steps, each kept only if it stays in
    the bracket and lowers the residual. Working with the deficit keeps
    ``w`` accurate where ``h_p`` is flat (``z`` near 1).
    """
    if not p > 1:
        raise ValueError(f"p must exceed 1, got {p}")
    if not 0 < z <= 1:
        raise ValueError(f"omega_p is defined for z in (0,1], got {z}")
    if z == 1:
        return 1.0
    y = 1.0 - z
    lo, hi = 0.0, 1.0 / (p - 1)
    while hi - lo > BISECTION_WIDTH:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        # the deficit increases on the bracket
        if _deficit(mid, p) < y:
            lo = mid
        else:
            hi = mid
    u = 0.5 * (lo + hi)
    r = _deficit(u, p) - y
    for _ in range(3):
        d = p * (p - 1) * (1.0 + u) ** (p - 2) * u
        if d == 0 or r == 0:
            break
        u2 = u - r / d
        r2 = _deficit(u2, p) - y
        if not (lo <= u2 <= hi and abs(r2) < abs(r)):
            break
        u, r = u2, r2
    return 1.0 + u


def bellman_value(f: float, F: float, p: float) -> float:
    _check_pair(f, F, p)
    z = min(1.0, f**p / F)
    return F * omega_p(z, p) ** p


def coefficients_18(p: float, q: float, beta: float) -> tuple[float, float]:
    """Constants ``(c1, c2)`` of ``int (Mphi)^p <= -c1 f^p + c2 int phi^q (Mphi)^(p-q)``."""
    denom = (p - 1) * q * beta + (p - q)
    if not denom > 0:
        raise ValueError(f"(p-1) q beta + (p-q) must be positive, got {denom}")
    return q * (beta + 1) / denom, p * (beta + 1) ** q / denom


def a0(beta: float, p: float, q: float) -> float:
    b = beta + 1
    return (q - 1) * beta / b**q + (p - q) / p / b ** (q - 1)


def g_beta(beta: float, p: float) -> float:
    if beta < 0 or beta * (p - 1) >= 1:
        raise ValueError(f"g_beta needs 0 <= beta < 1/(p-1), got beta={beta}, p={p}")
    return 1.0 / ((beta + 1) ** (p - 1) * (1 - beta * (p - 1)))


def solve_beta(f: float, F: float, p: float) -> float:
    """The ``beta`` in ``[0, 1/(p-1))`` with ``g_beta(beta, p) = F / f^p``."""
    _check_pair(f, F, p)
    z = min(1.0, f**p / F)
    return omega_p(z, p) - 1.0


def beta_balance_sides(beta: float, f: float, F: float, p: float, q: float) -> tuple[float, float]:
    """Both sides of ``F (b)^(p-q) = A0 F b^p + (q/p) b^(1-q) f^p`` with ``b = beta + 1``."""
    b = beta + 1
    return F * b ** (p - q), a0(beta, p, q) * F * b**p + (q / p) * b ** (1 - q) * f**p
