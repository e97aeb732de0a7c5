import math

import numpy as np
import pytest

from crownwave import lorentz as lz


def test_form_on_basis():
    assert lz.minkowski_form(lz.basis(3, 0), lz.basis(3, 0)) == -1
    assert lz.minkowski_form(lz.basis(3, 3), lz.basis(3, 3)) == 1


def test_form_symmetric(rng):
    z = rng.normal(size=5) + 1j * rng.normal(size=5)
    w = rng.normal(size=5) + 1j * rng.normal(size=5)
    assert lz.minkowski_form(z, w) == lz.minkowski_form(w, z)


def test_form_dimension_mismatch():
    with pytest.raises(lz.GeometryError):
        lz.minkowski_form(np.zeros(3), np.zeros(4))


def test_cs_values():
    assert lz.cs_eval(0.0) == (1.0, 1.0)
    c, s = lz.cs_eval(math.pi ** 2 / 4)
    assert abs(c) < 1e-16 and s == pytest.approx(2 / math.pi, rel=1e-15)
    c, s = lz.cs_eval(-1.0)
    assert c == pytest.approx(math.cosh(1), rel=1e-15)
    assert s == pytest.approx(math.sinh(1), rel=1e-15)


def test_cs_branch_free(rng):
    # series and closed form agree across the switch radius, complex input
    z = rng.uniform(-4, 4, 50) + 1j * rng.uniform(-4, 4, 50)
    c, s = lz.cs_eval(z)
    r = np.sqrt(z)
    assert np.allclose(c, np.cos(r), rtol=1e-13, atol=1e-15)
    assert np.allclose(s, np.sin(r) / r, rtol=1e-13, atol=1e-15)


def test_exp_map_examples():
    n = 3
    en = lz.base_point(n)
    assert np.array_equal(lz.exp_map(en, np.zeros(n + 1)), en)
    v = np.array([0.3, 0.3, 0.0, 0.0])
    assert np.allclose(lz.exp_map(en, v), en + v, atol=1e-16)
    boosted = lz.apply(lz.make_boost(0.3, n), en)
    assert np.allclose(lz.exp_map(en, 0.3 * lz.basis(n, 0)), boosted, atol=1e-15)


def test_log_map_examples(rng):
    n = 3
    en = lz.base_point(n)
    assert np.allclose(lz.log_map(en, en), 0)
    frame = lz.tangent_frame(en)
    for _ in range(100):
        v = rng.uniform(-0.5, 0.5, n) @ frame
        assert np.allclose(lz.log_map(en, lz.exp_map(en, v)), v, atol=1e-12)
    null = np.array([0.4, 0.0, 0.4, 0.0])
    assert np.allclose(lz.log_map(en, en + null), null, atol=1e-15)


def test_log_map_outside_chart():
    en = lz.base_point(2)
    with pytest.raises(lz.NotInChart):
        lz.log_map(en, -en)


def test_null_exp_is_affine(rng):
    for n in (2, 3, 5):
        x = lz.apply_ds(lz.random_isometry(n, rng, 0.5), lz.base_point(n))
        frame = lz.tangent_frame(x)
        u = rng.normal(size=n - 1)
        c = np.concatenate([[np.linalg.norm(u)], u]) * rng.uniform(0.1, 2)
        v = c @ frame
        assert np.max(np.abs(lz.exp_map(x, v) - (x + v))) <= 1e-14 * (1 + np.max(np.abs(v)))


def test_causal_examples():
    en = lz.base_point(3)
    assert lz.classify_causal(en, np.array([0, 1.0, 0, 0])) is lz.CausalTag.Outside
    y = np.array([math.sinh(1), 0, 0, math.cosh(1)])
    assert lz.classify_causal(en, y) is lz.CausalTag.FuturePlus
    y[0] = -y[0]
    assert lz.classify_causal(en, y) is lz.CausalTag.PastMinus
    assert lz.classify_causal(en, en) is lz.CausalTag.OnCone


def test_crown_membership_examples():
    n = 3
    p = lz.crown_membership(1j * lz.basis(n, 0))
    assert isinstance(p, lz.CrownPoint) and p.branch is lz.Branch.Forward
    t = 0.7
    z = 1j * math.cos(t) * lz.basis(n, 0) + math.sin(t) * lz.basis(n, n)
    assert isinstance(lz.crown_membership(z), lz.CrownPoint)
    rej = lz.crown_membership(lz.basis(n, n).astype(complex))
    assert isinstance(rej, lz.CrownRejection)
    assert "[v,v] < 0" in rej.reason
    back = lz.crown_membership(np.conj(z))
    assert back.branch is lz.Branch.Backward
    assert np.allclose(back.z, np.conj(z))


def test_approach_point_examples():
    z = lz.approach_point(None, math.pi / 4, n=3)
    assert np.allclose(z, [1j / math.sqrt(2), 0, 0, 1 / math.sqrt(2)], atol=1e-16)
    en = lz.base_point(3)
    dist = [np.linalg.norm(lz.approach_point(None, t, n=3) - en) for t in np.linspace(1.0, 1.57, 12)]
    assert all(a > b for a, b in zip(dist, dist[1:]))
    assert dist[-1] < 1e-3
    for s in (-1.0, 0.0, 1.0):
        for t in (0.5, 1.0, 1.5):
            z = lz.approach_point(lz.make_boost(s, 3), t)
            assert isinstance(lz.crown_membership(z), lz.CrownPoint)
    with pytest.raises(ValueError):
        lz.approach_point(None, 0.0, n=3)


def test_boosts_and_rotations():
    n = 4
    assert np.array_equal(lz.make_boost(0.0, n).matrix, np.eye(n + 1))
    t = 0.8
    got = lz.apply(lz.make_boost(t, n), lz.basis(n, n))
    assert np.allclose(got, [math.sinh(t), 0, 0, 0, math.cosh(t)], atol=1e-16)
    R = lz.make_rotation(1, 2, 0.9, n)
    assert np.allclose(lz.apply(R, lz.basis(n, n)), lz.basis(n, n))
    assert np.allclose(lz.apply(R, lz.basis(n, 0)), lz.basis(n, 0))
    g = lz.make_boost(0.4, n, axis=2) @ R
    assert np.allclose((g @ g.inverse()).matrix, np.eye(n + 1), atol=1e-14)


def test_isometry_rejects_reflections():
    m = np.eye(3)
    m[0, 0] = -1
    m[1, 1] = -1
    with pytest.raises(lz.GeometryError):
        lz.Isometry(m)


def test_metric_density_examples(rng):
    n = 3
    en = lz.base_point(n)
    assert lz.metric_density(en, np.zeros(n)) == pytest.approx(1.0, abs=1e-8)
    v = np.array([0.2, 0.4, -0.3])
    base = lz.metric_density(en, v)
    th = 0.7
    rot = v.copy()
    rot[1], rot[2] = math.cos(th) * v[1] - math.sin(th) * v[2], math.sin(th) * v[1] + math.cos(th) * v[2]
    assert lz.metric_density(en, rot) == pytest.approx(base, abs=1e-8)
    for axis in (1, 2):
        h = lz.make_boost(0.3, n, axis)
        y = lz.apply_ds(h, lz.chart_point(en, v))
        v2 = lz.chart_coords(en, y)
        assert lz.metric_density(en, v2) == pytest.approx(base, abs=1e-8)


def test_metric_density_chart_bound():
    with pytest.raises(lz.NotInChart):
        lz.metric_density(lz.base_point(2), np.array([0.0, 1.3]))


def test_quadric_check():
    with pytest.raises(ValueError):
        lz.check_ds(np.array([0.0, 0.5, 0.5]))
