"""Matsubara frequencies, theta_2, Bessel K and Fermi thermodynamics."""

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .errors import AccuracyError, DomainError
from .quadrature import QuadratureSpec, integrate_interval

_LOG_TINY = 745.0


def _require_positive(name, value):
    if not value > 0:
        raise DomainError(f"{name} must be positive, got {value}")


def matsubara_frequency(l, beta):
    """Fermionic frequency (2l - 1) pi / beta; accepts integer arrays."""
    _require_positive("beta", beta)
    return (2 * np.asarray(l) - 1) * np.pi / beta


def x_tanh_x_partial(x, terms):
    """Symmetric partial fraction sum converging from below to x tanh x."""
    if terms < 1:
        raise DomainError("terms must be at least 1")
    odd = (2.0 * np.arange(1, int(terms) + 1) - 1.0) * np.pi
    x2 = 4.0 * np.square(x)
    # l and 1 - l give the same summand, hence the factor 2
    return float(2.0 * np.sum(x2 / (odd[::-1] ** 2 + x2)))


def _theta2_direct(s, beta):
    total = 0.0
    l = 1
    while True:
        w = (2 * l - 1) * math.pi / beta
        term = math.exp(-s * w * w)
        total += term
        if term < 1e-18 * total or term == 0.0:
            break
        l += 1
    return 2.0 * total


def _theta2_poisson(s, beta):
    # The alternating sum cancels down to roughly exp(-s pi^2 / beta^2), so
    # enough working digits are carried to keep the result relatively exact.
    cancel = s * math.pi ** 2 / beta ** 2 / math.log(10.0)
    dps = int(30 + max(0.0, cancel))
    with mpmath.workdps(dps):
        s_, b_ = mpmath.mpf(s), mpmath.mpf(beta)
        a = b_ * b_ / (4 * s_)
        eps = mpmath.mpf(10) ** (-dps)
        total = mpmath.mpf(1)
        n = 1
        while True:
            term = 2 * mpmath.exp(-a * n * n)
            total += -term if n % 2 else term
            if term < eps:
                break
            n += 1
        return float(b_ / (2 * mpmath.sqrt(mpmath.pi * s_)) * total)


def theta2(s, beta, representation=None):
    """Sum over all integers l of exp(-s * omega_l^2).

    ``representation`` is "direct", "poisson" or None to pick the faster one.
    """
    _require_positive("s", s)
    _require_positive("beta", beta)
    if representation is None:
        representation = "direct" if 4 * math.pi ** 2 * s / beta ** 2 >= 1 else "poisson"
    if representation == "direct":
        return _theta2_direct(float(s), float(beta))
    if representation == "poisson":
        return _theta2_poisson(float(s), float(beta))
    raise DomainError(f"unknown representation {representation!r}")


def bessel_k(nu, x, tol=1e-12, spec=None):
    """Modified Bessel function K_nu(x) from its cosh-integral representation.

    The integrand is scaled by e^x and cut where it falls below e^-745.
    """
    _require_positive("x", x)
    if nu < 0:
        raise DomainError("nu must be non-negative")
    nu, x = float(nu), float(x)
    # solve x (cosh t - 1) - nu t = 745 by Newton from above
    t = math.acosh(1.0 + _LOG_TINY / x) + 1.0
    for _ in range(100):
        f = x * (math.cosh(t) - 1.0) - nu * t - _LOG_TINY
        d = x * math.sinh(t) - nu
        step = f / d
        t -= step
        if abs(step) < 1e-12 * t:
            break
    t_max = max(t, 1e-3)

    def integrand(t):
        e = -x * (np.cosh(t) - 1.0)
        return 0.5 * (np.exp(e + nu * t) + np.exp(e - nu * t))

    spec = (spec or QuadratureSpec()).replace(rel_tol=tol, abs_tol=1e-300)
    res = integrate_interval(integrand, 0.0, t_max, spec, vectorized=True)
    value = res.value * math.exp(-x)
    if not res.converged:
        raise AccuracyError(f"K_{nu}({x}) missed tolerance {tol}", estimate=value,
                            error_estimate=res.error_estimate * math.exp(-x))
    return value


@dataclass(frozen=True)
class ThermoPoint:
    """Fermi occupation, entropy and free-energy density of one level."""

    lam: float
    beta: float
    occupation: float
    entropy: float
    free_energy_density: float


def _softplus_neg(a):
    """log(1 + e^-a) for a >= 0."""
    return math.log1p(math.exp(-a))


def fermi_thermo(lam, beta):
    """Occupation 1/(1+e^{beta lam}), its entropy and -(1/beta) log(2 cosh(beta lam / 2))."""
    _require_positive("beta", beta)
    z = beta * lam
    a = abs(z)
    ea = math.exp(-a)
    occ = 1.0 / (1.0 + math.exp(z)) if z <= 0 else ea / (1.0 + ea)
    tail = ea / (1.0 + ea)
    entropy = _softplus_neg(a) + a * tail
    density = -(0.5 * a + _softplus_neg(a)) / beta
    return ThermoPoint(float(lam), float(beta), occ, entropy, density)
