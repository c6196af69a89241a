"""Brute-force Matsubara-sum referees for the closed-form multipliers.

Each oracle sums over fermionic frequencies omega_l and integrates over the
loop momentum p in polar coordinates about the k axis (radius p and
c = cos(angle to k)); the azimuth contributes 2 pi.  The species sum is formed
pointwise inside the integrand, before any integration or frequency sum,
because only the combined integrand is integrable and summable.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import zeta

from .errors import DomainError, OracleAccuracyError
from .multipliers import _species
from .quadrature import QuadratureSpec, integrate_half_line
from .special_functions import bessel_k

KINDS = ("gamma", "vector", "scalar")


@dataclass(frozen=True)
class OracleSpec:
    """Truncation and accuracy settings for the Matsubara oracles."""

    l_max: int = 400
    p_quadrature: QuadratureSpec = field(default_factory=lambda: QuadratureSpec(rel_tol=1e-7))
    tail_extrapolation: bool = True
    target_rel_tol: float = 1e-4

    def __post_init__(self):
        if self.l_max < 8:
            raise DomainError("l_max must be at least 8")


@dataclass(frozen=True)
class OracleResult:
    value: float
    tail: float
    error_estimate: float
    l_max: int

    def __float__(self):
        return self.value


_PAIRS = ((0, 0), (1, 1), (2, 2), (0, 1), (1, 2), (0, 2))


def _dd_product(f, g):
    """Divided-difference table of f*g from those of f and g (Leibniz rule)."""
    out = {}
    for i, j in _PAIRS:
        out[i, j] = sum(f[i, r] * g[r, j] for r in range(i, j + 1))
    return out


def _dd_reciprocal(base, x):
    """Table of 1/(base + mu) on nodes x; every entry is a signed product."""
    r = [1.0 / (base + xi) for xi in x]
    return {(0, 0): r[0], (1, 1): r[1], (2, 2): r[2],
            (0, 1): -r[0] * r[1], (1, 2): -r[1] * r[2], (0, 2): r[0] * r[1] * r[2]}


def _dd_linear(const, slope, x):
    """Table of const + slope * mu."""
    v = [const + slope * xi for xi in x]
    z = 0.0 * v[0]
    return {(0, 0): v[0], (1, 1): v[1], (2, 2): v[2],
            (0, 1): slope + z, (1, 2): slope + z, (0, 2): z}


def _numerator(kind, P, C, k, w2):
    """(constant, slope in mu) of the numerator over a^2 b, times 1/omega^2.

    The pieces -1/a^2 + 1/(ab) are folded in exactly via
    1/(ab) - 1/a^2 = (2pkc - k^2)/(a^2 b).
    """
    if kind == "gamma":
        return 3.0 * P * P - w2, 3.0
    if kind == "vector":
        return 2.0 * P * k * C, 0.0
    return 3.0 * P * P - w2 - 2.0 * P * k * C, 3.0


def _integrand(kind, P, C, k, w2, m2, c):
    """Species-combined integrand on the (p, c) grid and its uncancelled size.

    For a regulated scheme the weights are second divided-difference weights
    on the nodes m_j^2, so the combination is evaluated as
    (x0 - x1)(x0 - x2) F[x0, x1, x2] without any subtraction of large terms.
    """
    A = P * P + w2
    B = P * P + k * k - 2.0 * P * k * C + w2
    const, slope = _numerator(kind, P, C, k, w2)
    const = const + 0.0 * B
    per_species = w2[..., None] * (const[..., None] + slope * m2) / \
        ((A[..., None] + m2) ** 2 * (B[..., None] + m2))
    mass = np.abs(per_species) @ np.abs(c)
    if m2.size == 3 and np.all(np.diff(m2) > 0) and _is_regulated(m2, c):
        x = [float(v) for v in m2]
        ra = _dd_reciprocal(A, x)
        rb = _dd_reciprocal(B, x)
        lin = _dd_linear(const, slope, x)
        table = _dd_product(_dd_product(_dd_product(ra, ra), rb), lin)
        val = w2 * (x[0] - x[1]) * (x[0] - x[2]) * table[0, 2]
    else:
        val = per_species @ c
    return val, mass


def _is_regulated(m2, c):
    return abs(c[0] - 1.0) < 1e-15 and abs(np.sum(c)) <= 1e-12 * np.max(np.abs(c)) and \
        abs(np.sum(c * m2)) <= 1e-10 * np.max(np.abs(c * m2))


def _gauss(n, a, b):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * w


def _per_l(kind, omegas, k, m, c, n_p, n_c):
    """p-integrals for a block of frequencies on an n_p x n_c product rule."""
    m2 = m ** 2
    sigma = np.sqrt(np.min(m2) + k * k + omegas ** 2)           # (L,)
    t, wt = _gauss(n_p, 0.0, 1.0)
    cc, wc = _gauss(n_c, -1.0, 1.0)
    p = sigma[:, None] * (t / (1.0 - t))[None, :]               # (L, n_p)
    wp = sigma[:, None] * (wt / (1.0 - t) ** 2)[None, :] * p * p
    P = p[:, :, None]
    C = cc[None, None, :]
    w2 = (omegas ** 2)[:, None, None]
    val, mass = _integrand(kind, P, C, k, w2, m2, c)            # (L, n_p, n_c)
    weight = 2.0 * np.pi * wp[:, :, None] * wc[None, None, :]
    return np.sum(val * weight, axis=(1, 2)), np.sum(mass * weight, axis=(1, 2))


def per_frequency_integrals(kind, k, beta, scheme, l_max, p_spec=None, block=20):
    """p-integrals I_l for l = 1..l_max (the l and 1-l terms are equal).

    The product Gauss rule is doubled until the block sum changes by less than
    ``p_spec.rel_tol``.  Returns (values, absolute masses, error estimates).
    """
    if kind not in KINDS:
        raise DomainError(f"unknown oracle kind {kind!r}")
    p_spec = p_spec or QuadratureSpec(rel_tol=1e-7)
    m, c = _species(scheme)
    ls = np.arange(1, l_max + 1)
    omegas = (2 * ls - 1) * np.pi / beta
    vals = np.empty(l_max)
    masses = np.empty(l_max)
    errs = np.empty(l_max)
    for start in range(0, l_max, block):
        sl = slice(start, min(start + block, l_max))
        n_p, n_c = 48, 24
        prev, _ = _per_l(kind, omegas[sl], k, m, c, n_p, n_c)
        while True:
            n_p, n_c = 2 * n_p, 2 * n_c
            cur, mass = _per_l(kind, omegas[sl], k, m, c, n_p, n_c)
            diff = np.abs(cur - prev)
            if np.sum(diff) <= p_spec.rel_tol * np.sum(np.abs(cur)) + 1e-15 * np.sum(mass) \
                    or n_p >= 768:
                break
            prev = cur
        vals[sl], masses[sl], errs[sl] = cur, mass, diff
    return vals, masses, errs


def _prefactor(beta):
    # sum over all integers l equals twice the sum over l >= 1
    return 2.0 / (2.0 * beta * np.pi ** 3)


def oracle(kind, k, beta, scheme, oracle_spec=None):
    """Matsubara-sum value of the requested multiplier coefficient."""
    if not k >= 0:
        raise DomainError("k must be non-negative")
    if not beta > 0:
        raise DomainError("beta must be positive")
    spec = oracle_spec or OracleSpec()
    L = spec.l_max
    vals, masses, errs = per_frequency_integrals(kind, float(k), float(beta), scheme, L,
                                                 spec.p_quadrature)
    head = math.fsum(vals)
    tail_factor = (2 * L - 1) ** 3 * zeta(3, L + 0.5) / 8.0
    alt_factor = (2 * L - 3) ** 3 * zeta(3, L - 0.5) / 8.0
    tail = vals[-1] * tail_factor
    tail_alt = vals[-2] * alt_factor - vals[-1]
    scale = max(abs(head), 1e-300)
    noise = 1e-13 * masses
    # the combined summand must fall at least like 1/omega^2 to be summable
    h = L // 2
    decaying = abs(vals[-1]) <= 0.5 * abs(vals[h - 1]) or abs(vals[-1]) <= noise[-1] * 10
    if not decaying or abs(tail) > 10 * spec.target_rel_tol * scale:
        raise OracleAccuracyError(
            f"frequency sum is not converging at l_max={L}: last term {vals[-1]:.3e}, "
            f"tail estimate {tail:.3e} against partial sum {head:.3e}",
            partial_sums=np.cumsum(vals) * _prefactor(beta))
    total = head + (tail if spec.tail_extrapolation else 0.0)
    err = np.sum(errs) + abs(tail - tail_alt) + (0.0 if spec.tail_extrapolation else abs(tail))
    pre = _prefactor(beta)
    return OracleResult(total * pre, tail * pre, err * pre, L)


def gamma_matsubara_oracle(k, beta, scheme, oracle_spec=None):
    """Gamma(k, beta) from the frequency sum of its momentum integral."""
    return oracle("gamma", k, beta, scheme, oracle_spec)


def vector_multiplier_oracle(k, beta, scheme, oracle_spec=None):
    """Coefficient of |A(k)|^2 in the second-order term at fixed beta."""
    if not k > 0:
        raise DomainError("k must be positive")
    return oracle("vector", k, beta, scheme, oracle_spec)


def scalar_multiplier_oracle(k, beta, scheme, oracle_spec=None):
    """Coefficient of |V(k)|^2 in the second-order term at fixed beta."""
    if not k > 0:
        raise DomainError("k must be positive")
    return oracle("scalar", k, beta, scheme, oracle_spec)


def oracle_partial_sums(kind, k, beta, scheme, l_values, p_spec=None):
    """Untruncated partial sums S(L) = prefactor * sum_{l<=L} I_l for each L."""
    l_values = sorted(int(v) for v in l_values)
    vals, _, _ = per_frequency_integrals(kind, float(k), float(beta), scheme,
                                         l_values[-1], p_spec)
    cs = np.cumsum(vals) * _prefactor(beta)
    return {L: float(cs[L - 1]) for L in l_values}


def beta_averaged_oracle(kind, k, beta, scheme, oracle_spec=None, nodes=24):
    """(1/beta) int_0^beta of an oracle by an ``nodes``-point Gauss rule."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    bs = 0.5 * beta * (x + 1.0)
    vals = [oracle(kind, k, b, scheme, oracle_spec).value for b in bs]
    return 0.5 * float(np.dot(w, vals))


def matsubara_weight_partial_sum(beta, m, l_max):
    """beta^-2 sum_{l=1}^{l_max} omega_l^2 / (m^2 + omega_l^2)^2, bounded by 1/8.

    Each term is at most 1 / (pi^2 (2l - 1)^2).  The sum over all integers
    pairs l with 1 - l and is exactly twice this one.
    """
    ls = np.arange(1, l_max + 1)
    w2 = ((2 * ls - 1) * np.pi / beta) ** 2
    return float(math.fsum(w2 / (m * m + w2) ** 2) / beta ** 2)


@dataclass(frozen=True)
class BesselIdentityCheck:
    lhs: float
    rhs_corrected: float
    rhs_as_printed: float


def bessel_integral_identity_check(nu, alpha, gamma_param, spec=None):
    """int_0^inf x^(nu-1) exp(-alpha/x - gamma x) dx against two closed forms.

    ``rhs_corrected`` uses the argument 2 sqrt(alpha gamma); ``rhs_as_printed``
    uses 2 sqrt(alpha nu), returned as +inf where that argument is zero.
    """
    if not (alpha > 0 and gamma_param > 0):
        raise DomainError("alpha and gamma must be positive")
    if nu < 0:
        raise DomainError("nu must be non-negative")
    spec = spec or QuadratureSpec(rel_tol=1e-12, abs_tol=1e-300)
    scale = math.sqrt(alpha / gamma_param)

    def f(x):
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            v = x ** (nu - 1.0) * np.exp(-alpha / x - gamma_param * x)
        return np.where(np.isfinite(v), v, 0.0)

    res = integrate_half_line(f, spec, vectorized=True, scale=scale)
    if not res.converged:
        from .errors import ConvergenceError
        raise ConvergenceError("Bessel identity integral did not converge", estimate=res.value)
    pref = 2.0 * (alpha / gamma_param) ** (nu / 2.0)
    corrected = pref * bessel_k(nu, 2.0 * math.sqrt(alpha * gamma_param))
    arg = 2.0 * math.sqrt(alpha * nu)
    printed = pref * bessel_k(nu, arg) if arg > 0 else math.inf
    return BesselIdentityCheck(float(res.value), corrected, printed)
