import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import special

from pvfree import (DomainError, bessel_k, fermi_thermo, matsubara_frequency, theta2,
                    x_tanh_x_partial)


def test_matsubara_frequency_values():
    assert matsubara_frequency(1, 2.0) == pytest.approx(math.pi / 2)
    assert matsubara_frequency(0, 1.0) == pytest.approx(-math.pi)


def test_matsubara_frequency_never_zero():
    ls = np.arange(-10 ** 6, 10 ** 6 + 1)
    assert np.all(matsubara_frequency(ls, 0.7) != 0)


@pytest.mark.parametrize("s", [0.05, 0.5, 5.0])
@pytest.mark.parametrize("beta", [0.5, 2.0, 10.0])
def test_theta2_representations_agree(s, beta):
    d = theta2(s, beta, "direct")
    p = theta2(s, beta, "poisson")
    assert p == pytest.approx(d, rel=1e-10)


def test_theta2_against_jacobi_definition():
    # sum over odd n of exp(-s (n pi / beta)^2): scipy-free brute force with many terms
    s, beta = 0.3, 1.7
    n = np.arange(-401, 402, 2)
    brute = math.fsum(np.exp(-s * (n * np.pi / beta) ** 2))
    assert theta2(s, beta) == pytest.approx(brute, rel=1e-14)


def test_theta2_rejects_nonpositive():
    with pytest.raises(DomainError):
        theta2(0.0, 1.0)
    with pytest.raises(DomainError):
        theta2(1.0, -1.0)


@pytest.mark.parametrize("x", [0.5, 1.0, 5.0])
def test_bessel_half_order_closed_form(x):
    assert bessel_k(0.5, x) == pytest.approx(math.sqrt(math.pi / (2 * x)) * math.exp(-x), rel=1e-8)


@pytest.mark.parametrize("nu", [0.0, 1.0, 2.5, 7.0])
@pytest.mark.parametrize("x", [0.01, 0.3, 2.0, 30.0, 500.0])
def test_bessel_matches_scipy(nu, x):
    assert bessel_k(nu, x) == pytest.approx(special.kv(nu, x), rel=1e-10)


@given(st.floats(0.0, 5.0), st.lists(st.floats(0.01, 40.0), min_size=2, max_size=6, unique=True))
def test_bessel_decreasing_in_x(nu, xs):
    xs = sorted(xs)
    vals = [bessel_k(nu, x) for x in xs]
    assert all(b < a for a, b in zip(vals, vals[1:]))


@given(st.floats(-50.0, 50.0), st.floats(0.01, 100.0))
def test_fermi_free_energy_identity(lam, beta):
    t = fermi_thermo(lam, beta)
    lhs = lam * (t.occupation - 0.5) - t.entropy / beta
    a = abs(beta * lam)
    rhs = -(0.5 * a + math.log1p(math.exp(-a))) / beta
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lam))
    assert t.free_energy_density == pytest.approx(rhs, rel=1e-15, abs=1e-300)


@pytest.mark.parametrize("lam,beta", [(50.0, 100.0), (-50.0, 100.0), (1e3, 5.0)])
def test_fermi_overflow_safe(lam, beta):
    t = fermi_thermo(lam, beta)
    assert all(math.isfinite(v) for v in (t.occupation, t.entropy, t.free_energy_density))
    assert 0.0 <= t.occupation <= 1.0
    assert t.entropy >= 0.0


def test_fermi_half_filling_at_zero_energy():
    t = fermi_thermo(0.0, 3.0)
    assert t.occupation == 0.5
    assert t.entropy == pytest.approx(math.log(2.0))


@given(st.floats(-6.0, 6.0).filter(lambda x: abs(x) > 1e-3),
       st.integers(1, 200), st.integers(1, 200))
def test_x_tanh_x_partial_monotone_and_bounded(x, l1, l2):
    lo, hi = sorted((l1, l2))
    a, b = x_tanh_x_partial(x, lo), x_tanh_x_partial(x, hi)
    assert b >= a
    assert b <= x * math.tanh(x) * (1 + 1e-14)


def test_x_tanh_x_partial_converges():
    assert x_tanh_x_partial(1.3, 200000) == pytest.approx(1.3 * math.tanh(1.3), rel=1e-5)
