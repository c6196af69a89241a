import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pvfree import (DomainError, OracleAccuracyError, OracleSpec, WeightedSpecies,
                    bessel_integral_identity_check, gamma, gamma_matsubara_oracle,
                    matsubara_weight_partial_sum, oracle_partial_sums, scalar_multiplier_oracle,
                    vector_multiplier_oracle)
from pvfree.matsubara_oracles import _integrand, oracle, per_frequency_integrals


@pytest.mark.parametrize("k,beta", [(0.5, 1.0), (2.0, 0.5), (1.0, 2.0)])
def test_gamma_oracle_matches_closed_form(scheme, k, beta):
    closed = gamma(k, beta, scheme).gamma_total
    orc = gamma_matsubara_oracle(k, beta, scheme)
    assert orc.value == pytest.approx(closed, rel=1e-7)
    assert orc.error_estimate < 1e-6 * abs(orc.value)


def test_scalar_equals_gamma_minus_vector(scheme):
    g = gamma_matsubara_oracle(1.5, 0.8, scheme).value
    v = vector_multiplier_oracle(1.5, 0.8, scheme).value
    s = scalar_multiplier_oracle(1.5, 0.8, scheme).value
    assert s == pytest.approx(g - v, rel=1e-9)


def test_vector_oracle_vanishes_with_k(scheme):
    v = vector_multiplier_oracle(1e-3, 1.0, scheme).value
    g = gamma_matsubara_oracle(1e-3, 1.0, scheme).value
    assert abs(v) < 1e-5 * abs(g)


def test_vector_and_scalar_need_positive_k(scheme):
    with pytest.raises(DomainError):
        vector_multiplier_oracle(0.0, 1.0, scheme)
    with pytest.raises(DomainError):
        scalar_multiplier_oracle(0.0, 1.0, scheme)


def test_divided_differences_match_plain_species_sum(scheme):
    m2 = scheme.masses ** 2
    c = scheme.coefficients
    P = np.array([[[0.3]], [[1.1]]])
    C = np.array([[[-0.4, 0.2, 0.9]]])
    w2 = np.array([[[2.0]], [[7.0]]])
    for kind in ("gamma", "vector", "scalar"):
        val, _ = _integrand(kind, P, C, 0.7, w2, m2, c)
        plain, _ = _integrand(kind, P, C, 0.7, w2, m2, c + np.array([0.0, 0.0, 1e-9]))
        # perturbing c breaks the constraints and forces the direct sum
        assert val == pytest.approx(plain, rel=1e-6, abs=1e-14)


def test_summand_decays_like_inverse_cube(scheme):
    vals, _, _ = per_frequency_integrals("gamma", 1.0, 1.0, scheme, 200)
    l = np.arange(1, 201)
    ratio = vals[-1] * (2 * l[-1] - 1) ** 3 / (vals[99] * (2 * l[99] - 1) ** 3)
    assert ratio == pytest.approx(1.0, rel=0.05)


def test_truncation_stable(scheme):
    a = oracle("gamma", 0.8, 1.3, scheme, OracleSpec(l_max=200)).value
    b = oracle("gamma", 0.8, 1.3, scheme, OracleSpec(l_max=400)).value
    assert a == pytest.approx(b, rel=1e-8)


def test_without_tail_extrapolation_error_reports_tail(scheme):
    r = oracle("gamma", 0.8, 1.3, scheme, OracleSpec(tail_extrapolation=False))
    assert r.error_estimate >= abs(r.tail)


@pytest.mark.parametrize("kind", ["gamma", "vector", "scalar"])
def test_single_species_diverges(kind):
    single = WeightedSpecies((1.0,), (1.0,))
    with pytest.raises(OracleAccuracyError) as info:
        oracle(kind, 1.0, 1.0, single)
    assert info.value.partial_sums is not None
    sums = oracle_partial_sums(kind, 1.0, 1.0, single, (50, 100, 200, 400))
    v = [abs(sums[L]) for L in (50, 100, 200, 400)]
    assert v[0] < v[1] < v[2] < v[3]


@pytest.mark.parametrize("kind", ["gamma", "vector", "scalar"])
def test_single_species_grows_at_least_linearly(kind):
    single = WeightedSpecies((1.0,), (1.0,))
    sums = oracle_partial_sums(kind, 1.0, 1.0, single, (50, 400))
    # linear growth from zero gives a ratio of 8
    assert abs(sums[400]) >= 8 * abs(sums[50])


@settings(max_examples=40)
@given(st.floats(0.01, 100.0), st.floats(0.0, 50.0), st.integers(1, 3000))
def test_matsubara_weight_sum_bounded(beta, m, l_max):
    assert matsubara_weight_partial_sum(beta, m, l_max) <= 0.125


def test_matsubara_weight_sum_approaches_bound_for_massless_modes():
    assert matsubara_weight_partial_sum(1.0, 0.0, 200000) == pytest.approx(0.125, rel=1e-5)


@pytest.mark.parametrize("nu,alpha,gam", [(0.0, 1.0, 1.0), (1.0, 1.0, 1.0), (0.5, 0.25, 4.0),
                                          (2.5, 3.0, 0.5)])
def test_bessel_integral_identity(nu, alpha, gam):
    r = bessel_integral_identity_check(nu, alpha, gam)
    assert r.lhs == pytest.approx(r.rhs_corrected, rel=1e-6)


def test_printed_bessel_argument_inconsistent():
    assert math.isinf(bessel_integral_identity_check(0.0, 1.0, 1.0).rhs_as_printed)
    r = bessel_integral_identity_check(0.5, 0.25, 4.0)
    assert r.rhs_as_printed != pytest.approx(r.lhs, rel=0.1)
