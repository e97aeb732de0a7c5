import cmath
import math

import mpmath as mp
import numpy as np
import pytest

from crownwave import fixtures as fx
from crownwave.gamma import digamma, rgamma
from crownwave.hyp2f1 import (CutSide, HypTriple, NotAdmissible, OnCut, boundary_2f1,
                              boundary_one_minus, gauss_2f1, gauss_2f1_method, hyp2f1_vec,
                              jump_across_cut, near_one_expansion, ode_residual)

SETS = fx.REFERENCE_SETS


@pytest.mark.parametrize("n,lam", SETS)
def test_value_at_origin(n, lam):
    assert gauss_2f1(HypTriple.family(n, lam), 0.0).value == 1


def test_identity_cases():
    r = gauss_2f1(HypTriple.family(3, 0.5), 0.5)
    assert r.value == pytest.approx(math.sqrt(2), rel=1e-15)
    assert r.method == "series"
    assert gauss_2f1(HypTriple(1, 1, 2), 0.5).value == pytest.approx(2 * math.log(2), rel=1e-15)


@pytest.mark.parametrize("n,lam", SETS)
def test_against_fixture_oracle(n, lam, fixture_doc):
    recs = [r for r in fx.records(fixture_doc, "hyp2f1")
            if r["params"]["n"] == n and fx.uncx(r["params"]["lam"]) == complex(lam)]
    assert len(recs) == fx.HYP_POINTS
    z = np.array([fx.uncx(r["z"]) for r in recs])
    ref = np.array([complex(r["value_re"], r["value_im"]) for r in recs])
    got = hyp2f1_vec(HypTriple.family(n, lam), z)
    assert np.max(np.abs(got - ref) / np.abs(ref)) <= 1e-10


@pytest.mark.parametrize("n,lam", SETS)
def test_beyond_unit_disk_vs_mpmath(n, lam, rng):
    P = HypTriple.family(n, lam)
    r = rng.uniform(0.9, 4.0, 30)
    th = rng.uniform(0.05, 2 * math.pi - 0.05, 30)
    z = 1 + r * np.exp(1j * th)
    got = hyp2f1_vec(P, z)
    with mp.workdps(30):
        ref = np.array([complex(mp.hyp2f1(*P.abc, complex(w))) for w in z])
    assert np.max(np.abs(got - ref) / np.abs(ref)) <= 1e-10


def test_routes_agree_on_overlaps(rng):
    P = HypTriple.family(3, 0.4)
    # inside all three convergence disks: |z| < 1, |z/(z-1)| < 1, |1-z| < 1
    z = 0.25 + 0.15 * np.exp(1j * rng.uniform(-3, 3, 20))
    s = gauss_2f1_method(P, z, "series")
    for route in ("pfaff", "connection"):
        other = gauss_2f1_method(P, z, route)
        assert np.max(np.abs(other - s) / np.abs(s)) < 1e-12


def test_parameter_symmetry(rng):
    P = HypTriple.family(4, 1.2j)
    z = 2.5 * (rng.uniform(-1, 1, 30) + 1j * rng.uniform(0.01, 1, 30))
    assert np.allclose(hyp2f1_vec(P, z), hyp2f1_vec(P.swapped(), z), rtol=1e-13)


@pytest.mark.parametrize("n,lam", SETS)
def test_ode_residual(n, lam, rng):
    z = 3 * (rng.uniform(-1, 1, 25) + 1j * rng.uniform(-1, 1, 25))
    assert np.max(ode_residual(HypTriple.family(n, lam), z)) <= 1e-9


def test_on_cut_guard():
    with pytest.raises(OnCut):
        gauss_2f1(HypTriple.family(3, 0.4), 1.5)


def test_lambda_admissibility():
    for bad in (-0.3, 1 + 1j, 1.5):
        with pytest.raises(NotAdmissible):
            HypTriple.family(3, bad, allow_rho=False)
    HypTriple.family(3, 2.7j)


def test_boundary_identity_case():
    P = HypTriple.family(3, 0.5)
    x = 1.5
    assert boundary_2f1(P, x, CutSide.Minus) == pytest.approx(-1j * (x - 1) ** -0.5, rel=1e-14)
    assert boundary_2f1(P, x, CutSide.Plus) == pytest.approx(1j * (x - 1) ** -0.5, rel=1e-14)


@pytest.mark.parametrize("n,lam", SETS)
def test_boundary_against_fixture(n, lam, fixture_doc):
    recs = [r for r in fx.records(fixture_doc, "boundary")
            if r["params"]["n"] == n and fx.uncx(r["params"]["lam"]) == complex(lam)]
    assert len(recs) == 2 * len(fx.BOUNDARY_XS)
    P = HypTriple.family(n, lam)
    for r in recs:
        ref = complex(r["value_re"], r["value_im"])
        got = boundary_2f1(P, r["x"], CutSide.parse(r["side"]))
        assert abs(got - ref) <= 1e-10 * abs(ref)


@pytest.mark.parametrize("n,lam", SETS)
def test_schwarz_reflection(n, lam):
    P = HypTriple.family(n, lam)
    for x in (1.05, 1.7, 3.0, 12.0):
        plus = boundary_2f1(P, x, CutSide.Plus)
        minus = boundary_2f1(P, x, CutSide.Minus)
        assert abs(plus - minus.conjugate()) <= 1e-13 * abs(plus)


def test_boundary_matches_eps_limit():
    P = HypTriple.family(4, 1.2j)
    for side in (CutSide.Plus, CutSide.Minus):
        got = boundary_2f1(P, 1.5, side)
        assert abs(got - fx.eps_boundary(P, 1.5, side)) <= 1e-7 * abs(got)


def test_jump_fixture_two_routes(fixture_doc):
    rec = fx.records(fixture_doc, "jump")[0]
    assert rec["provenance"] == "two-route"
    P = HypTriple.family(3, 0.4)
    ref = complex(rec["value_re"], rec["value_im"])
    assert jump_across_cut(P, 1.5) == pytest.approx(ref, rel=1e-13)
    sides = boundary_2f1(P, 1.5, CutSide.Minus) - boundary_2f1(P, 1.5, CutSide.Plus)
    assert abs(sides - ref) <= 1e-12 * abs(ref)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_jump_equals_side_difference(n):
    P = HypTriple.family(n, 0.3j)
    for x in (1.2, 1.9, 4.0):
        sides = boundary_2f1(P, x, CutSide.Minus) - boundary_2f1(P, x, CutSide.Plus)
        assert abs(jump_across_cut(P, x) - sides) <= 1e-11 * max(1, abs(sides))


def test_jump_vanishes_at_boundary_parameter():
    P = HypTriple.family(3, 1.0)
    assert jump_across_cut(P, 1.5) == 0
    assert jump_across_cut(HypTriple.family(5, 2.0), 2.5) == 0


def test_jump_imaginary_lambda_is_imaginary():
    j = jump_across_cut(HypTriple.family(4, 1.2j), 1.5)
    assert abs(j.real) <= 1e-14 * abs(j)
    assert abs(j.imag) > 0


def test_near_one_power_law():
    P = HypTriple.family(4, 0.3j)
    for th in np.linspace(-2.5, 2.5, 7):
        z = 1 - 1e-3 * cmath.exp(1j * th)
        ratio = gauss_2f1(P, z).value / near_one_expansion(P, z)
        assert abs(ratio - 1) <= 0.05


def test_near_one_identity_case_exact():
    P = HypTriple.family(3, 0.5)
    for z in (0.999, 0.95 + 0.02j):
        assert near_one_expansion(P, z) == pytest.approx(gauss_2f1(P, z).value, rel=1e-13)


@pytest.mark.parametrize("lam", [0.0, 0.3j])
def test_log_law_next_term(lam):
    # the ratio to the leading logarithm approaches 1 only like 1/ln, with the
    # constant 2 psi(1) - psi(a) - psi(b) as the first correction
    P = HypTriple.family(2, lam)
    a, b, _ = P.abc
    C = rgamma(a) * rgamma(b)
    K = 2 * digamma(1.0) - digamma(a) - digamma(b)
    errs = []
    for d in (1e-2, 1e-4, 1e-8):
        for side in (CutSide.Plus, CutSide.Minus):
            denom = -math.log(d) + side.sign * 1j * math.pi
            ratio = boundary_one_minus(P, np.array([d]), side)[0] / (C * denom)
            assert abs(ratio - 1 - K / denom) <= 10 * d * abs(math.log(d))
        errs.append(abs(ratio - 1))
    assert errs[0] > errs[1] > errs[2]


def test_near_one_log_form_trend():
    P = HypTriple.family(2, 0.0)
    errs = [abs(gauss_2f1(P, 1 - d).value / near_one_expansion(P, 1 - d) - 1) for d in (1e-3, 1e-6, 1e-12)]
    assert errs[0] > errs[1] > errs[2]


def test_near_one_guards():
    P = HypTriple.family(4, 0.3j)
    with pytest.raises(ValueError):
        near_one_expansion(P, 0.5)
    with pytest.raises(ValueError):
        near_one_expansion(HypTriple(0.2, 0.3, 1.0), 0.99)
