import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special

from pvfree import (DomainError, MultiplierTable, QuadratureSpec, build_table, gamma,
                    gamma_beta_averaged, gamma_thermal_part, gamma_zero_part, m_thermal,
                    m_thermal_as_printed, m_zero, scheme_from_masses, uehling)
from pvfree.multipliers import (log_sum, samples_batch, shifted_logs, thermal_batch,
                                zero_temperature_batch)
from pvfree.quadrature import gauss_legendre_average


def m_zero_oracle(k, s):
    # 40-digit arithmetic removes the species cancellation entirely
    with mpmath.workdps(40):
        m = [mpmath.mpf(float(v)) for v in s.masses]
        c = [mpmath.mpf(float(v)) for v in s.coefficients]
        kk = mpmath.mpf(k) ** 2
        f = lambda u: u * (1 - u) * mpmath.fsum(cj * mpmath.log(mj ** 2 + u * (1 - u) * kk)
                                                for cj, mj in zip(c, m))
        pts = [0] + [mpmath.mpf(10) ** (-e) for e in range(14, 0, -2)] + [mpmath.mpf(1) / 2]
        half = mpmath.quad(f, pts)
        return float(-(2 / mpmath.pi) * 2 * half)


def m_thermal_oracle(k, beta, s):
    # int_0^inf dt / (1 + e^{X cosh t}) = sum_n (-1)^(n+1) K_0(n X)
    m, c = s.masses, s.coefficients
    n = np.arange(1, 200)
    sign = (-1.0) ** (n + 1)

    def f(u):
        X = beta * np.sqrt(m ** 2 + u * (1 - u) * k * k)
        inner = np.array([math.fsum(sign * special.k0(n * x)) for x in X])
        return u * (1 - u) * np.dot(c, inner)

    return -(8 / np.pi) * integrate.quad(f, 0, 1, epsabs=0, epsrel=1e-11, limit=200)[0]


def uehling_oracle(k):
    f = lambda z: (z * z - z ** 4 / 3) / (1 + k * k * (1 - z * z) / 4)
    return k * k / (4 * np.pi) * integrate.quad(f, 0, 1, epsabs=0, epsrel=1e-13)[0]


@pytest.mark.parametrize("k", [0.0, 0.3, 1.0, 4.0, 20.0, 300.0])
def test_m_zero_against_direct_quadrature(scheme, k):
    assert m_zero(k, scheme) == pytest.approx(m_zero_oracle(k, scheme), rel=1e-9, abs=1e-15)


def test_m_zero_at_origin_is_log_cutoff(scheme):
    # u(1-u) integrates to 1/6, so M0(0) = (2/3pi) log Lambda
    assert m_zero(0.0, scheme) == pytest.approx(2 * math.log(scheme.cutoff) / (3 * math.pi), rel=1e-12)


@pytest.mark.parametrize("k,beta", [(0.0, 1.0), (0.5, 1.0), (2.0, 0.5), (5.0, 2.0), (1.0, 0.1)])
def test_m_thermal_against_bessel_series(scheme, k, beta):
    assert m_thermal(k, beta, scheme) == pytest.approx(m_thermal_oracle(k, beta, scheme), rel=1e-8)


@pytest.mark.parametrize("k", [0.01, 0.5, 1.0, 5.0, 50.0])
def test_uehling_against_direct_quadrature(k):
    assert uehling(k) == pytest.approx(uehling_oracle(k), rel=1e-12)


def test_uehling_small_k_expansion():
    # U(k) ~ (k^2 / 4 pi) * int (z^2 - z^4/3) dz = k^2 / (4 pi) * 4/15
    k = 1e-4
    assert uehling(k) == pytest.approx(k * k / (4 * np.pi) * 4 / 15, rel=1e-7)


@pytest.mark.parametrize("k", [0.5, 1.0, 5.0])
def test_uehling_limit_deficit_shrinks(k):
    deficits = []
    for lp in (10.0, 100.0, 1000.0):
        s = scheme_from_masses(1.0, lp, 2 * lp)
        deficits.append(abs(2 * math.log(s.cutoff) / (3 * math.pi) - m_zero(k, s) - uehling(k)))
    assert deficits[0] > deficits[1] > deficits[2]
    assert deficits[2] <= 5e-3


def test_zero_temperature_gamma_vanishes_at_origin(scheme):
    parts = gamma_zero_part(0.0, scheme)
    assert parts.values["g11"] == 0.0
    scale = max(abs(v) for v in parts.values.values())
    assert abs(parts.sum) <= 1e-13 * scale


@settings(max_examples=25, deadline=None)
@given(st.floats(0.0, 40.0))
def test_zero_temperature_gamma_vanishes_everywhere(k):
    s = scheme_from_masses(1, 2, 3)
    parts = gamma_zero_part(k, s)
    scale = max(abs(v) for v in parts.values.values())
    assert abs(parts.sum) <= 1e-10 * scale


def test_printed_zero_components_differ(scheme):
    derived = gamma_zero_part(0.0, scheme)
    printed = gamma_zero_part(0.0, scheme, printed=True)
    assert printed.values["g12"] != pytest.approx(derived.values["g12"], rel=1e-2)
    assert printed.values["g2"] == derived.values["g2"]


def test_printed_m_thermal_differs_from_bessel_series(scheme):
    oracle = m_thermal_oracle(0.5, 1.0, scheme)
    assert m_thermal_as_printed(0.5, 1.0, scheme) != pytest.approx(oracle, rel=0.1)


@pytest.mark.parametrize("k", [0.0, 1.0, 5.0])
def test_thermal_parts_suppressed_at_low_temperature(scheme, k):
    beta = 40.0 / scheme.m0
    assert abs(m_thermal(k, beta, scheme)) <= 1e-10
    parts = gamma_thermal_part(k, beta, scheme)
    assert all(abs(v) <= 1e-10 for v in parts.values.values())
    assert abs(parts.sum) <= 1e-10


def test_thermal_parts_grow_with_temperature(scheme):
    vals = [abs(m_thermal(1.0, b, scheme)) for b in (8.0, 4.0, 2.0, 1.0)]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_log_sum_switchover(scheme):
    k = math.sqrt(2) * scheme.m2
    for u in np.linspace(0.01, 0.99, 15):
        assert log_sum(k, u, scheme, True) == pytest.approx(log_sum(k, u, scheme, False), abs=1e-12)


def test_shifted_logs_keep_weighted_sums(scheme):
    m, c = scheme.masses, scheme.coefficients
    x = np.array([0.1, 0.25])
    k = np.array([1e4])
    direct = np.log(m ** 2 + x[:, None] * k[0] ** 2) @ c
    shifted = shifted_logs(x, k, m)[:, 0, :] @ c
    assert shifted == pytest.approx(direct, abs=1e-12)


@pytest.mark.parametrize("k", [1e3, 1e4, 1e6])
def test_large_k_stays_accurate(scheme, k):
    assert m_zero(k, scheme) == pytest.approx(m_zero_oracle(k, scheme), rel=1e-8)


@pytest.mark.parametrize("k", [1e3, 1e5])
def test_large_k_gamma_components_converge(scheme, k):
    parts = gamma_zero_part(k, scheme)
    scale = max(abs(v) for v in parts.values.values())
    # four components, each converged to the default rel_tol of 1e-9
    assert abs(parts.sum) <= 4e-9 * scale


def test_gamma_sample_fields(scheme):
    s = gamma(1.0, 2.0, scheme)
    assert s.gamma_total == pytest.approx(math.fsum(list(s.gamma_zero.values())
                                                    + list(s.gamma_thermal.values())), abs=1e-17)
    assert s.gamma_over_k2 == s.gamma_total
    assert gamma(0.0, 1.0, scheme).gamma_over_k2 is None


def test_gamma_over_k2_bounded(scheme):
    ks = np.geomspace(0.5, 50, 30)
    for beta in (0.5, 1.0, 5.0):
        g = np.array([s.gamma_over_k2 for s in samples_batch(ks, beta, scheme)])
        assert np.all(np.isfinite(g))
        assert np.max(np.abs(g)) < 1.0


def test_multipliers_lipschitz_constant_stable(scheme):
    ks = np.linspace(0.0, 50.0, 399)
    samples = samples_batch(ks, 1.0, scheme)
    for attr in ("m_zero", "m_thermal", "gamma_total"):
        v = np.array([getattr(s, attr) for s in samples])
        fine = np.max(np.abs(np.diff(v))) / (ks[1] - ks[0])
        coarse = np.max(np.abs(np.diff(v[::2]))) / (ks[2] - ks[0])
        assert fine <= 1.5 * coarse


def test_beta_average_of_gamma_matches_high_order_gauss(scheme):
    adaptive = gamma_beta_averaged(1.0, 0.5, scheme, QuadratureSpec(rel_tol=1e-10))
    gauss = gauss_legendre_average(
        lambda b: np.array([gamma(1.0, bi, scheme).gamma_total for bi in b]), 0.5, 40,
        vectorized=True)
    assert adaptive == pytest.approx(gauss, rel=1e-8)


def test_batch_matches_scalar(scheme):
    ks = np.array([0.2, 1.5, 7.0])
    batch = zero_temperature_batch(ks, scheme)["m_zero"]
    assert batch == pytest.approx([m_zero(k, scheme) for k in ks], rel=1e-10)
    th = thermal_batch(ks, np.array([0.5, 1.0, 3.0]), scheme, which=("mt",))["m_thermal"]
    assert th == pytest.approx([m_thermal(k, b, scheme) for k, b in zip(ks, (0.5, 1.0, 3.0))],
                               rel=1e-9)


@pytest.mark.parametrize("bad", [-1.0, math.nan, math.inf])
def test_invalid_k_rejected(scheme, bad):
    with pytest.raises(DomainError):
        m_zero(bad, scheme)


@pytest.mark.parametrize("bad", [0.0, -2.0])
def test_invalid_beta_rejected(scheme, bad):
    with pytest.raises(DomainError):
        m_thermal(1.0, bad, scheme)


def test_table_csv_layout(scheme):
    table = build_table(scheme, 1.0, [0.0, 0.5, 1.0], quantities=("m0",), workers=1)
    lines = table.to_csv().splitlines()
    assert lines[0] == "k,M0,MT,Gamma,Gamma_over_k2,err"
    cells = lines[1].split(",")
    assert cells[0] == "0" and cells[2] == "" and cells[3] == "" and cells[4] == ""
    assert float(cells[1]) == table.samples[0].m_zero


def test_table_requires_increasing_k(scheme):
    samples = samples_batch([1.0, 0.5], 1.0, scheme, which=("m0",))
    with pytest.raises(DomainError):
        MultiplierTable(scheme, 1.0, tuple(samples))


def test_table_independent_of_worker_count(scheme):
    ks = np.linspace(0, 12, 19)
    one = build_table(scheme, 0.7, ks, workers=1).to_csv()
    two = build_table(scheme, 0.7, ks, workers=2).to_csv()
    assert one == two
