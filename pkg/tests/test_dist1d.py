import cmath
import math

import mpmath as mp
import numpy as np
import pytest

from crownwave import dist1d as d1
from crownwave.hyp2f1 import CutSide

PLUS, MINUS = CutSide.Plus, CutSide.Minus


def mp_bump(center, hw):
    def f(x):
        s = (x - center) / hw
        if abs(s) >= 1:
            return mp.mpf(0)
        return mp.exp(-1 / (1 - s * s))
    return f


def mp_integral(f, pts):
    with mp.workdps(30):
        return float(mp.quad(f, pts))


def test_delta_of_mollifier():
    r = d1.pair(d1.DeltaDeriv(0), d1.TestFn1D(0.0, 1.0))
    assert r.value == pytest.approx(math.exp(-1), rel=1e-15)
    assert r.method == "exact"


@pytest.mark.parametrize("k", range(8))
def test_delta_derivatives_exact(k):
    # <delta^(k), x^k psi> = (-1)^k k! psi(0)
    phi = d1.TestFn1D(0.0, 0.8, k=k)
    got = d1.pair(d1.DeltaDeriv(k), phi).value
    assert got == pytest.approx((-1) ** k * math.factorial(k) * math.exp(-1), rel=1e-13)


def test_xplus_regular_region():
    phi = d1.TestFn1D(1.5, 0.5)
    ref = mp_integral(lambda x: x ** -0.5 * mp_bump(1.5, 0.5)(x), mp.linspace(1, 2, 9))
    assert d1.pair(d1.XPlusPow(-0.5), phi).value == pytest.approx(ref, rel=1e-10)


def test_xplus_integrable_singularity():
    phi = d1.TestFn1D(0.0, 1.0)
    ref = mp_integral(lambda x: x ** -0.5 * mp_bump(0, 1)(x), mp.linspace(0, 1, 9))
    r = d1.pair(d1.XPlusPow(-0.5), phi)
    assert r.method == "direct"
    assert r.value == pytest.approx(ref, rel=1e-10)


@pytest.mark.parametrize("lam", [-1.5, -2.5 + 0.3j, -0.7j - 1.2])
def test_xplus_regularised_matches_analytic_continuation(lam):
    # integrate by parts m = 2 times: <x_+^lam, phi> = <x_+^(lam+2), phi''> / ((lam+1)(lam+2))
    phi = d1.TestFn1D(0.1, 0.9)
    f = mp_bump(0.1, 0.9)
    hi = phi.support[1]
    with mp.workdps(20):
        lamm = mp.mpc(lam)
        integral = mp.quad(lambda x: x ** (lamm + 2) * mp.diff(f, x, 2), mp.linspace(0, hi, 9))
        ref = complex(integral / ((lamm + 1) * (lamm + 2)))
    got = d1.pair(d1.XPlusPow(lam), phi).value
    assert abs(got - ref) <= 1e-9 * abs(ref)


def test_residue_points_refused():
    with pytest.raises(d1.ResiduePoint):
        d1.pair(d1.XPlusPow(-2.0), d1.TestFn1D())


def test_decompose_negative_integer():
    parts = d1.i0_decompose(-1, PLUS)
    assert parts[0] == (1.0, d1.PrincipalPow(1))
    coef, dist = parts[1]
    assert dist == d1.DeltaDeriv(0)
    assert coef == pytest.approx(-1j * math.pi, abs=1e-15)


def test_decompose_half_power_phases():
    plus = d1.i0_decompose(-0.5, PLUS)
    minus = d1.i0_decompose(-0.5, MINUS)
    assert plus[0] == minus[0] == (1.0, d1.XPlusPow(-0.5))
    assert plus[1][0] == pytest.approx(cmath.exp(-0.5j * math.pi))
    assert minus[1][0] == pytest.approx(cmath.exp(0.5j * math.pi))
    with pytest.raises(ValueError):
        d1.i0_decompose(2, PLUS)


def test_sokhotski_plemelj():
    phi = d1.TestFn1D(0.2, 1.0)
    diff = d1.pair(d1.I0Pow(-1, PLUS), phi).value - d1.pair(d1.I0Pow(-1, MINUS), phi).value
    assert abs(diff - (-2j * math.pi * float(phi(np.array(0.0))))) <= 1e-8
    eps = d1.eps_limit("pow", -1, PLUS, phi)[0] - d1.eps_limit("pow", -1, MINUS, phi)[0]
    assert abs(diff - eps) <= 1e-8


@pytest.mark.parametrize("lam", [-0.5, -1.0, -1.5, -2.0, -0.5 + 0.3j, 0.4j])
@pytest.mark.parametrize("side", [PLUS, MINUS])
def test_i0_power_vs_eps_limit(lam, side):
    phi = d1.TestFn1D(0.15, 1.0)
    got = d1.pair(d1.I0Pow(lam, side), phi).value
    ref, _ = d1.eps_limit("pow", lam, side, phi)
    assert abs(got - ref) <= 1e-6 * max(1, abs(ref))


def test_log_even_bump():
    phi = d1.TestFn1D(0.0, 1.0)
    half = mp_integral(mp_bump(0, 1), mp.linspace(-1, 0, 5))
    p = d1.log_i0_pair(PLUS, phi)
    m = d1.log_i0_pair(MINUS, phi)
    assert p.imag == pytest.approx(math.pi * half, rel=1e-12)
    assert m.imag == pytest.approx(-math.pi * half, rel=1e-12)
    assert p.real == m.real


@pytest.mark.parametrize("side", [PLUS, MINUS])
def test_log_vs_eps_limit(side):
    phi = d1.TestFn1D(-0.2, 0.9)
    ref, _ = d1.eps_limit("log", 0, side, phi)
    assert abs(d1.log_i0_pair(side, phi) - ref) <= 1e-7


def test_modulated_derivatives():
    phi = d1.Modulated(d1.TestFn1D(0.1, 0.7), 1.3)
    d = phi.derivs_at0(3)
    h = 1e-4
    num = (phi(np.array(h)) - phi(np.array(-h))) / (2 * h)
    assert abs(d[1] - num) <= 1e-6 * abs(num)


# ------------------------------------------------------------ decay probe

def test_heaviside_probe_slow_both_ways():
    w = d1.TestFn1D(0.0, 1.0)
    t = d1.windowed_fourier(d1.Heaviside(), w)
    assert not t.rapid_plus and not t.rapid_minus
    assert t.exponent_plus == pytest.approx(-1, abs=0.1)
    tau = t.taus[-1]
    expect = math.exp(-1) / (2 * math.pi * tau)
    assert t.plus[-1] == pytest.approx(expect, rel=0.05)
    assert t.minus[-1] == pytest.approx(expect, rel=0.05)


def test_delta_probe_flat():
    t = d1.windowed_fourier(d1.DeltaDeriv(0), d1.TestFn1D(0.0, 1.0))
    assert np.allclose(t.plus, math.exp(-1), rtol=1e-12)
    assert np.allclose(t.minus, math.exp(-1), rtol=1e-12)
    assert not t.rapid_plus and not t.rapid_minus


def test_i0_probe_one_sided():
    t = d1.windowed_fourier(d1.I0Pow(-0.5, PLUS), d1.TestFn1D(0.0, 1.0))
    assert not t.rapid_plus
    assert t.rapid_minus
    mirror = d1.windowed_fourier(d1.I0Pow(-0.5, MINUS), d1.TestFn1D(0.0, 1.0))
    assert mirror.rapid_plus and not mirror.rapid_minus


def test_smooth_function_probe_rapid():
    t = d1.windowed_fourier(d1.ExpInv(), d1.TestFn1D(0.0, 1.0))
    assert t.rapid_plus and t.rapid_minus


def test_decay_csv_schema():
    t = d1.windowed_fourier(d1.Heaviside(), d1.TestFn1D(0.0, 1.0), taus=(8.0, 16.0))
    rows = list(t.csv_rows())
    assert rows[0] == ("tau", "abs_ft_plus", "abs_ft_minus")
    assert len(rows) == 3


def test_expinv_derivative_polynomial():
    # D e^{-1/x} = x^-2 e^{-1/x}; D^2 = (x^-4 - 2 x^-3) e^{-1/x}
    assert d1.expinv_derivative_poly(1) == [0, 0, 1]
    assert d1.expinv_derivative_poly(2) == [0, 0, 0, -2, 1]


def test_expinv_not_analytic():
    # derivative growth beats every C^(N+1) N^N bound eventually: it is super-geometric
    # in N relative to N^N for the fixed C tested here
    ratios = [d1.expinv_derivative_max(N) / float(N) ** N for N in (5, 10, 20)]
    assert ratios[0] < ratios[1] < ratios[2]
