import json
import math

import numpy as np
import pytest

from crownwave import lorentz as lz
from crownwave import wavefront as wf
from crownwave.kernels import Kind, KernelParams, SphericalDist

PSI, TILDE = wf.SpecKind.PsiSpec, wf.SpecKind.PsiTildeSpec


def null_vector(n, rng, sign=1.0, r=None):
    u = rng.normal(size=n - 1)
    u /= np.linalg.norm(u)
    r = rng.uniform(0.1, 0.8) if r is None else r
    return np.concatenate([[sign * r], r * u])


def parallel(a, b):
    a, b = np.asarray(a, float), np.asarray(b, float)
    return abs(abs(np.dot(a, b)) - np.linalg.norm(a) * np.linalg.norm(b)) <= 1e-12 * np.linalg.norm(a) * np.linalg.norm(b)


# ---------------------------------------------------------------- symbols

def test_symbol_examples():
    assert wf.principal_symbol([1, 1, 0]) == 0
    assert wf.char_membership(np.zeros(3), [1, 1, 0])
    assert wf.principal_symbol([1, 0, 0]) == 1
    assert not wf.char_membership(np.zeros(3), [1, 0, 0])
    xi = np.array([0.6, -0.8, 0.0])
    assert wf.char_membership(np.zeros(3), 2 * xi) == wf.char_membership(np.zeros(3), xi)
    with pytest.raises(wf.ZeroCovector):
        wf.principal_symbol([0, 0])


def test_cotangent_dir_normalises():
    c = wf.CotangentDir(np.zeros(2), np.array([3.0, 4.0]))
    assert np.allclose(c.xi, [0.6, 0.8])
    with pytest.raises(wf.ZeroCovector):
        wf.CotangentDir(np.zeros(2), np.zeros(2))


# ------------------------------------------------------------------- flow

def test_flow_example():
    s = wf.hamiltonian_flow(np.zeros(3), np.array([1.0, -1.0, 0.0]), 2.0)
    ts = np.linspace(0, 2, 9)
    v, xi = s.at(ts)
    assert np.allclose(v, np.outer(ts, [2, 2, 0]), atol=1e-15)
    assert np.all(xi == s.xi0)
    assert np.all(np.abs([wf.principal_symbol(x) for x in xi]) <= 1e-15)
    assert s.rk4_defect(400) <= 1e-10


def test_flow_refuses_noncharacteristic():
    with pytest.raises(wf.NotCharacteristic):
        wf.hamiltonian_flow(np.zeros(2), np.array([1.0, 0.2]), 1.0)


def test_pullback_examples(rng):
    n = 3
    assert np.all(wf.df_pullback(np.zeros(n)) == 0)
    for sign in (1.0, -1.0):
        v = null_vector(n, rng, sign)
        assert parallel(wf.df_pullback(v), np.concatenate([[-v[0]], v[1:]]))
    # the normal set: df vanishes on the chart only at the origin
    for _ in range(200):
        v = rng.uniform(-0.9, 0.9, n)
        if lz.chart_form(v) < lz.CHART_BOUND_LITERAL and np.any(v):
            assert np.linalg.norm(wf.df_pullback(v)) > 0
    with pytest.raises(lz.NotInChart):
        wf.df_pullback(np.array([0.0, 1.5, 0.0]))


# -------------------------------------------------------------- the sets

def test_psi_pieces_follow_cone_components(rng):
    n = 3
    assert wf.model_side(Kind.Psi, 1) == -1
    assert wf.model_side(Kind.Psi, -1) == 1
    fut = wf.pullback_wf(wf.model_side(Kind.Psi, 1), 1)
    past = wf.pullback_wf(wf.model_side(Kind.Psi, -1), -1)
    v = null_vector(n, rng, 1.0)
    assert fut.contains(v, np.concatenate([[-v[0]], v[1:]]))
    assert not fut.contains(v, np.concatenate([[v[0]], -v[1:]]))
    w = null_vector(n, rng, -1.0)
    assert past.contains(w, np.concatenate([[w[0]], -w[1:]]))
    assert not fut.contains(w, np.concatenate([[w[0]], -w[1:]]))


def test_tilde_swaps_sides():
    for r in (1, -1):
        assert wf.model_side(Kind.PsiTilde, r) == -wf.model_side(Kind.Psi, r)


def test_apex_closure_signs():
    psi = [wf.pullback_wf(wf.model_side(Kind.Psi, r), r) for r in (1, -1)]
    tilde = [wf.pullback_wf(wf.model_side(Kind.PsiTilde, r), r) for r in (1, -1)]
    assert wf.apex_closure(psi).signs == frozenset({-1})
    assert wf.apex_closure(tilde).signs == frozenset({1})
    assert wf.apex_closure([]).signs == frozenset()


def test_pullback_refuses_apex():
    with pytest.raises(wf.RegionContainsApex):
        wf.pullback_wf(1, 0)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_spec_relations(n):
    rng = np.random.default_rng(n)
    x = lz.base_point(n)
    a, b = wf.predicted_wf(PSI, x), wf.predicted_wf(TILDE, x)
    anti = wf.antipode(a)
    for v, xi in wf.conic_samples(n, 1000, rng):
        in_a, in_b = a.contains(v, xi), b.contains(v, xi)
        assert in_b == a.contains(v, -xi)
        assert anti.contains(v, xi) == in_b
        assert not (in_a and in_b)
        assert not (in_a and a.contains(v, -xi))


@pytest.mark.parametrize("kind", [Kind.Psi, Kind.PsiTilde])
def test_assembled_equals_predicted(kind):
    n = 3
    rng = np.random.default_rng(11)
    x = lz.base_point(n)
    got, want = wf.assemble_wf(kind, x), wf.predicted_wf(kind, x)
    for v, xi in wf.conic_samples(n, 2000, rng):
        assert got.contains(v, xi) == want.contains(v, xi)


def test_apex_membership():
    x = lz.base_point(2)
    a = wf.predicted_wf(PSI, x)
    assert a.contains(np.zeros(2), np.array([-1.0, 1.0]))
    assert not a.contains(np.zeros(2), np.array([1.0, 1.0]))
    assert not a.contains(np.zeros(2), np.array([-1.0, 0.5]))


def test_coverage_of_conormals():
    for n in (2, 3, 4):
        assert wf.coverage_defects(n, 1000, np.random.default_rng(n)) == 0


def test_ambient_round_trip(rng):
    n = 3
    x = lz.apply_ds(lz.random_isometry(n, rng, 0.4), lz.base_point(n))
    v = null_vector(n, rng, 1.0, r=0.5)
    xi = np.concatenate([[-v[0]], v[1:]])
    y, Xi = wf.chart_to_ambient(x, v, xi)
    v2, xi2 = wf.ambient_to_chart(x, y, Xi)
    assert np.allclose(v2, v, atol=1e-12)
    assert np.allclose(xi2, xi, atol=1e-10)
    assert wf.wf_contains_ambient(wf.predicted_wf(PSI, x), y, Xi)


def test_sample_export_schema():
    doc = json.loads(wf.spec_samples_json(wf.predicted_wf(PSI, lz.base_point(3)), 3, 10, seed=1))
    assert doc["kind"] == "PsiSpec"
    assert len(doc["samples"]) == 10
    assert set(doc["samples"][0]) == {"v", "xi", "y", "Xi"}


# ------------------------------------------------------------------ probe

@pytest.mark.parametrize("n,lam", [(2, 0.3j), (3, 0.5)])
def test_probe_on_cone(n, lam):
    d = SphericalDist(Kind.Psi, lz.base_point(n), KernelParams.make(n, lam))
    vb = np.zeros(n)
    vb[0] = vb[1] = 0.5
    sing = np.concatenate([[-0.5], vb[1:]])
    rep = wf.decay_probe(d, vb, np.array([sing, -sing]))
    assert rep.singular == [True, False]
    assert rep.mags[0, -1] / rep.mags[1, -1] >= 1e3


@pytest.mark.parametrize("n,lam", [(2, 0.3j), (3, 0.5)])
def test_probe_outside_cone_all_regular(n, lam):
    d = SphericalDist(Kind.Psi, lz.base_point(n), KernelParams.make(n, lam))
    vb = np.array([0.3, 0.6, 0.0][:n])
    dirs = np.array([[1, 0.3, 0], [-0.5, 1, 0.2], [0.2, -1, 0.5], [-0.4, 0.4, 0]])[:, :n]
    rep = wf.decay_probe(d, vb, dirs)
    assert not any(rep.singular)
    rows = rep.csv_rows()
    assert rows[0] == "direction,xi,tau,magnitude,exponent,class"
    assert len(rows) == 1 + len(dirs) * len(rep.taus)
