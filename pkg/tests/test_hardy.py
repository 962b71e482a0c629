import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate as spi

from maxbell import PowerLaw, Rearranged, hardy_average, ineq_110_report, sharpness_g, sharpness_sweep
from maxbell.hardy import (
    beta_sweep,
    geometric_alpha_grid,
    powerlaw_lp_integral,
    step_hardy_integrals,
    sweep_csv,
)


def test_powerlaw_basics():
    g = PowerLaw.from_beta(2.0, 0.5)
    assert g.alpha == pytest.approx(1 / 3) and g.integral() == pytest.approx(2.0, rel=1e-15)
    assert g.in_lp(2.0) and not g.in_lp(3.0)
    with pytest.raises(ValueError):
        powerlaw_lp_integral(g, 3.0)
    with pytest.raises(ValueError):
        PowerLaw(1.0, 1.0)
    assert PowerLaw.from_alpha(1.0, 0.0)(np.array([0.1, 1.0])).tolist() == [1.0, 1.0]


@pytest.mark.parametrize("alpha", [0.0, 0.2, 1 / 3, 0.9])
def test_powerlaw_cell_averages(alpha):
    g = PowerLaw.from_alpha(1.0, alpha)
    n = 64
    avg = g.cell_averages(n)
    ref = [spi.quad(lambda t: g.c * t ** (-alpha), i / n, (i + 1) / n)[0] * n for i in range(n)]
    np.testing.assert_allclose(avg, ref, rtol=1e-10)
    assert np.all(np.diff(avg) <= 0)
    assert math.fsum(avg) / n == pytest.approx(1.0, rel=1e-13)


def test_hardy_average_powerlaw_eigenrelation():
    beta = 0.5
    g = PowerLaw.from_beta(1.0, beta)
    t = np.geomspace(1e-6, 1, 9)
    np.testing.assert_allclose(hardy_average(g, t), (beta + 1) * g(t), rtol=1e-14)


def test_hardy_average_step():
    g = Rearranged.from_steps([(0.25, 2.0), (1.0, 2 / 3)])
    assert hardy_average(g, 0.1) == 2.0
    assert hardy_average(g, 1.0) == pytest.approx(1.0, rel=1e-15)
    assert hardy_average(g, 0.5) == pytest.approx((0.5 + 0.25 * 2 / 3) / 0.5, rel=1e-15)
    with pytest.raises(ValueError):
        hardy_average(g, 0.0)


@st.composite
def profiles(draw):
    k = draw(st.integers(1, 6))
    cuts = sorted(set(draw(st.lists(st.floats(0.01, 0.99), min_size=k - 1, max_size=k - 1))))
    bps = cuts + [1.0]
    vals = sorted(draw(st.lists(st.floats(0.0, 10.0), min_size=len(bps), max_size=len(bps))), reverse=True)
    return Rearranged(bps, vals)


@given(profiles(), st.sampled_from([1.5, 2.0, 3.0]), st.floats(0.0, 1.0))
def test_step_hardy_integrals_against_quad(g, p, t):
    q = 1.0 + t * (p - 1.0)
    L, k, err = step_hardy_integrals(g, p, q)
    H = lambda s: hardy_average(g, s)
    pts = list(g.breakpoints[:-1])
    refL = spi.quad(lambda s: H(s) ** p, 0, 1, points=pts or None, limit=200)[0]
    refk = spi.quad(lambda s: H(s) ** (p - q) * float(g(s)) ** q, 0, 1, points=pts or None, limit=200)[0]
    assert L == pytest.approx(refL, rel=1e-8, abs=1e-10)
    assert k == pytest.approx(refk, rel=1e-8, abs=1e-10)
    assert err <= 1e-10


@given(profiles(), st.sampled_from([1.5, 2.0, 3.0]))
def test_q1_is_equality(g, p):
    assert abs(ineq_110_report(g, p, 1.0, 1.0 / (p - 1)).gap) <= 1e-9


def test_constant_profile_equality():
    g = Rearranged([1.0], [2.0])
    for p in (1.5, 3.0):
        rep = ineq_110_report(g, p, 1.0, 1 / (p - 1))
        assert rep.lhs == pytest.approx(2.0**p, rel=1e-14) and abs(rep.gap) <= 1e-12


@pytest.mark.parametrize("p,q,beta", [(2.0, 1.5, 0.5), (3.0, 2.0, 0.25), (1.5, 1.2, 1.0), (4.0, 3.9, 0.3)])
def test_powerlaw_residual_equals_J(p, q, beta):
    for f in (0.3, 1.0, 4.0):
        c = ineq_110_report(PowerLaw.from_beta(f, beta), p, q, beta).components
        assert abs(c["residual_41"] - c["J"]) <= 1e-9 * max(1.0, c["J"])
        assert abs(c["gap_41"]) <= 1e-9 * max(1.0, c["J"])


def test_powerlaw_J_alpha_at_theorem_beta():
    p, q = 3.0, 1.5
    beta = 1 / (p - 1)
    g = PowerLaw.from_beta(1.0, 0.2)
    c = ineq_110_report(g, p, q, beta).components
    assert c["J_alpha"] == pytest.approx(-sharpness_g(g.alpha, p, q), rel=1e-12)


def test_powerlaw_outside_lp_rejected():
    with pytest.raises(ValueError):
        ineq_110_report(PowerLaw.from_alpha(1.0, 0.6), 2.0, 1.5, 0.5)


def test_sharpness_g_direct_formula():
    for p, q in ((2, 2), (3, 1.5), (1.5, 1.2)):
        for a in (0.05, 0.2, 0.3):
            if a < 1 / p:
                direct = ((p / (p - 1)) ** q * (1 - a) ** q - 1) / (1 - a * p)
                assert sharpness_g(a, p, q) == pytest.approx(direct, rel=1e-12)
    with pytest.raises(ValueError):
        sharpness_g(0.5, 2.0, 1.5)


@pytest.mark.parametrize("p,q", [(2.0, 2.0), (3.0, 1.5), (1.5, 1.2)])
def test_sharpness_sweep_converges(p, q):
    lim = q / (p - 1)
    rows = sharpness_sweep(p, q, geometric_alpha_grid(p, 12, 1e-6))
    errs = [abs(G - lim) for _, G in rows]
    assert all(b < a for a, b in zip(errs, errs[1:]))
    assert errs[-1] / lim <= 1e-3
    assert rows[-1][0] == pytest.approx(1 / p - 1e-6, abs=1e-15)


def test_sweep_csv_format():
    text = sweep_csv([(0.1, 0.8), (0.2, 0.76)], "alpha", 0.75)
    lines = text.splitlines()
    assert lines[0] == "alpha,G,limit,abs_err"
    assert [float(x) for x in lines[1].split(",")] == [0.1, 0.8, 0.75, abs(0.8 - 0.75)]


def test_beta_sweep_rows():
    rows = beta_sweep(2.0, 1.5, [0.1, 0.5, 0.9])
    for b, resid, J in rows:
        assert resid == pytest.approx(J, rel=1e-12)
        assert J == pytest.approx(0.75 * (b + 1) ** -0.5, rel=1e-14)
    with pytest.raises(ValueError):
        beta_sweep(2.0, 1.5, [1.0])
