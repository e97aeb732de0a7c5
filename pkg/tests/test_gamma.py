import math

import mpmath as mp
import numpy as np
import pytest

from crownwave import fixtures as fx
from crownwave.gamma import GammaPole, complex_gamma, digamma, pochhammer, rgamma


def test_classical_values():
    assert complex_gamma(1.0) == pytest.approx(1.0, rel=1e-15)
    assert complex_gamma(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-15)


def test_recurrence_random_points(rng):
    z = rng.uniform(-6, 6, 100) + 1j * rng.uniform(-6, 6, 100)
    lhs = complex_gamma(z + 1)
    rhs = z * complex_gamma(z)
    assert np.max(np.abs(lhs - rhs) / np.abs(rhs)) < 1e-12


def test_against_mpmath(rng):
    z = rng.uniform(-4, 8, 40) + 1j * rng.uniform(-3, 3, 40)
    got = complex_gamma(z)
    ref = np.array([complex(mp.gamma(complex(w))) for w in z])
    assert np.max(np.abs(got - ref) / np.abs(ref)) < 1e-13


def test_digamma_one_matches_fixture(fixture_doc):
    rec = fx.records(fixture_doc, "digamma")[0]
    assert rec["provenance"] == "harmonic-series"
    assert digamma(1.0) == pytest.approx(rec["value_re"], abs=1e-13)


def test_digamma_reflection_side(rng):
    z = rng.uniform(-3.5, 3.5, 30) + 1j * rng.uniform(-2, 2, 30)
    ref = np.array([complex(mp.digamma(complex(w))) for w in z])
    assert np.max(np.abs(digamma(z) - ref) / np.maximum(1, np.abs(ref))) < 1e-12


def test_poles():
    with pytest.raises(GammaPole):
        complex_gamma(-2.0)
    with pytest.raises(GammaPole):
        digamma(0.0)
    assert rgamma(0.0) == 0
    assert rgamma(-3.0) == 0


def test_pochhammer():
    assert pochhammer(0.5, 3) == pytest.approx(0.5 * 1.5 * 2.5)
    assert pochhammer(2.0, 0) == 1
