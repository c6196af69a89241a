"""Vacuum-polarisation multipliers M0(k), M^T(k, beta), Gamma(k, beta) and U(k).

All evaluators take the wavenumber magnitude k = |k|.  Batch functions accept
arrays of k (and of beta for thermal quantities) and integrate them together
with a vector-valued adaptive rule; the scalar functions are thin wrappers.

Thermal integrands are written with q = exp(-y), y = X_j cosh t and
X_j = beta * sqrt(m_j^2 + u(1-u) k^2), so nothing overflows.  Alternating
n-sums are replaced by their closed forms wherever one exists.

``printed=True`` switches the M^T and Gamma evaluators to an alternative set
of integrands kept only for comparison reports; see ``PRINTED_NOTES``.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._format import fmt_float
from .errors import ConvergenceError, DomainError
from .pv_scheme import PauliVillarsScheme, WeightedSpecies
from .quadrature import DEFAULT_SPEC, beta_average, integrate_interval

PI2 = np.pi ** 2
LOG_UNDERFLOW = 745.0
# Beyond y = X_0 + DECAY_MARGIN every thermal integrand is below e^-60 of its peak.
DECAY_MARGIN = 60.0
N_MAX_ALTERNATING = 500

PRINTED_NOTES = {
    "m_thermal": "bracket 1/(1+e^-y) + (2log2 - y - 2log1p(e^-y))/y",
    "g12": "-(3/2pi^2) int u sum c sqrt(D)",
    "g3": "+(5/16pi^2) int u sum c D log D",
    "g11T": "prefactor 3/(4pi^2), numerator (1+y+q), denominator (1+e^y)^2",
    "g12T": "-(3/pi^(5/2)) sqrt(2 beta n) D^(3/2) cosh(t/2) alternating n-sum",
    "g2T": "numerator (1+y+q)",
    "g3T": "half-argument n-sum with prefactor 2X/(beta^2 n)",
}

ZERO_KEYS = ("g11", "g12", "g2", "g3")
THERMAL_KEYS = ("g11T", "g12T", "g2T", "g3T")


def _species(scheme):
    if isinstance(scheme, PauliVillarsScheme):
        return scheme.masses, scheme.coefficients
    if isinstance(scheme, WeightedSpecies):
        return scheme.masses, scheme.coefficients
    raise DomainError("expected a PauliVillarsScheme")


def _check_k(k):
    k = np.atleast_1d(np.asarray(k, dtype=float))
    if np.any(~np.isfinite(k)) or np.any(k < 0):
        raise DomainError("k must be finite and non-negative")
    return k


def _check_beta(beta):
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    if np.any(~np.isfinite(beta)) or np.any(beta <= 0):
        raise DomainError("beta must be positive")
    return beta


def log_shift(x, k, masses):
    """log(m_min^2 + x k^2), the logarithm of the lightest species."""
    return np.log(np.min(masses) ** 2 + x[:, None] * np.square(k)[None, :])


def shifted_logs(x, k, masses):
    """log(m_j^2 + x k^2) - log_shift(x, k) with shape (len(x), len(k), len(masses)).

    Written as log1p((m_j^2 - m_min^2) / (m_min^2 + x k^2)), which stays
    relatively accurate when k is large and all species logs nearly coincide.
    Any weighted sum with weights summing to zero is unchanged by the shift.
    """
    k2 = np.square(k)
    m2 = masses ** 2
    base = np.min(m2) + x[:, None] * k2[None, :]
    return np.log1p((m2 - np.min(m2))[None, None, :] / base[..., None])


def log_sum(k, u, scheme, large_k_form=None):
    """sum_j c_j log(m_j^2 + u(1-u)k^2) for scalar k and u.

    ``large_k_form`` forces one side of the switchover; None selects it from k.
    """
    m, c = _species(scheme)
    x = u * (1.0 - u)
    k2 = float(k) ** 2
    if large_k_form is None:
        large_k_form = k2 > np.max(m) ** 2
    if large_k_form:
        return float(np.sum(c * np.log(m ** 2 / k2 + x)))
    return float(np.sum(c * np.log(m ** 2 + x * k2)))


# ---------------------------------------------------------------- T = 0 ---

def uehling_batch(ks, spec=None):
    ks = _check_k(ks)
    k2 = ks ** 2

    def f(z):
        num = (z * z - z ** 4 / 3.0)[:, None]
        return num / (1.0 + k2[None, :] * (1.0 - z * z)[:, None] / 4.0)

    res = integrate_interval(f, 0.0, 1.0, spec or DEFAULT_SPEC, vectorized=True)
    _raise_unless(res, "Uehling integral", ks, None)
    return k2 / (4.0 * np.pi) * res.value


def uehling(k, spec=None):
    """U(k) = (k^2/4pi) int_0^1 (z^2 - z^4/3) / (1 + k^2 (1 - z^2)/4) dz."""
    return float(uehling_batch([k], spec)[0])


def _raise_unless(res, what, ks, betas):
    if not res.converged:
        where = f"k={np.asarray(ks).tolist()}" + ("" if betas is None else f", beta={np.asarray(betas).tolist()}")
        raise ConvergenceError(f"{what} did not converge at {where}",
                               estimate=res.value, error_estimate=res.error_estimate)


def zero_temperature_batch(ks, scheme, spec=None, printed=False):
    """M0 and the four zero-temperature Gamma components for every k.

    Returns a dict of arrays keyed m_zero, g11, g12, g2, g3, plus ``error``
    holding the absolute error estimate of each quantity (shape (n, 5)).
    """
    ks = _check_k(ks)
    m, c = _species(scheme)
    balanced = isinstance(scheme, PauliVillarsScheme)
    m2 = m ** 2
    k2 = ks ** 2

    def f(u):
        x = u * (1.0 - u)
        L = shifted_logs(x, ks, m)                                 # (N, K, J)
        D = m2 + (x[:, None] * k2[None, :])[..., None]             # (N, K, J)
        sL = L @ c
        sDL = (D * L) @ c
        sm2L = L @ (c * m2)
        if not balanced:
            # weights c, c D and c m^2 need not sum to zero without the PV constraints
            S = log_shift(x, ks, m)
            sL = sL + S * np.sum(c)
            sDL = sDL + S * (D @ c)
            sm2L = sm2L + S * np.dot(c, m2)
        uu = u[:, None]
        out = np.empty(L.shape[:2] + (5,))
        out[..., 0] = -(2.0 / np.pi) * x[:, None] * sL
        out[..., 1] = -(3.0 / (8 * PI2)) * k2[None, :] * (uu * (1 - uu) ** 2) * sL
        if printed:
            out[..., 2] = -(3.0 / (2 * PI2)) * uu * (np.sqrt(D) @ c)
            out[..., 4] = (5.0 / (16 * PI2)) * uu * sDL
        else:
            out[..., 2] = (9.0 / (16 * PI2)) * uu * sDL
            out[..., 4] = -(3.0 / (16 * PI2)) * uu * sDL
        out[..., 3] = -(3.0 / (8 * PI2)) * uu * sm2L
        return out

    res = integrate_interval(f, 0.0, 1.0, spec or DEFAULT_SPEC, vectorized=True)
    _raise_unless(res, "zero-temperature integral", ks, None)
    v = res.value
    return {"m_zero": v[:, 0], "g11": v[:, 1], "g12": v[:, 2], "g2": v[:, 3],
            "g3": v[:, 4], "error": res.error_estimate}


def m_zero(k, scheme, spec=None):
    """M0(k) = -(2/pi) int_0^1 u(1-u) sum_j c_j log(m_j^2 + u(1-u)k^2) du."""
    return float(zero_temperature_batch([k], scheme, spec)["m_zero"][0])


# -------------------------------------------------------------- thermal ---

def _alternating_sqrt_sum(q):
    """sum_{n>=1} (-1)^n sqrt(n) q^n, truncated once terms drop below 1e-16."""
    total = np.zeros_like(q)
    power = np.ones_like(q)
    done = q == 0
    for n in range(1, N_MAX_ALTERNATING + 1):
        power = power * q
        term = math.sqrt(n) * power
        total = total + (term if n % 2 == 0 else -term)
        nxt = math.sqrt(n + 1) * power * q
        done = nxt < 1e-16 * np.abs(total)
        if np.all(done | (nxt == 0)):
            return total
    raise ConvergenceError(
        f"alternating n-sum not below tolerance after n_max={N_MAX_ALTERNATING}",
        estimate=total)


def _thermal_terms(which, printed, m, k2, beta):
    """Per-species thermal integrands, stacked on a trailing component axis.

    The returned function maps (u, x, t, D, y, q) to an array of shape
    (T, N, P, J, ncomp); weighting by c_j and summing over j is left to the
    caller, which also uses the unweighted size to bound rounding error.
    """
    m2 = m ** 2

    def g(u, x, t, D, y, q):
        # u, x: (1, N, 1, 1); t: (T, N, P, 1); D: (1, N, P, J); y, q: (T, N, P, J)
        out = []
        opq = 1.0 + q
        b2 = beta[None, None, :, None] ** 2
        if "mt" in which:
            if printed:
                body = -q / opq - 2.0 * np.log1p(q) / y
            else:
                body = q / opq
            out.append(-(8.0 / np.pi) * x * body)
        if "g" in which:
            kk2 = k2[None, None, :, None]
            w11 = u * (1 - u) ** 2
            if printed:
                g11 = -(3.0 / (4 * PI2)) * kk2 * w11 * (q ** 3 * (1 + y + q) / opq ** 2)
                alt = _alternating_sqrt_sum(q)
                bb = beta[None, None, :, None]
                g12 = -(3.0 / np.pi ** 2.5) * u * (np.sqrt(2 * bb) * D ** 1.5
                                                    * np.cosh(0.5 * t) * alt)
                g2 = -(3.0 / (2 * PI2)) * u * (m2 * q * (1 + y + q) / opq ** 2)
                g3 = (1.0 / (2 * PI2)) * u * ((2 * y / b2) * np.log1p(np.exp(-0.5 * y))
                                               + 2 * D * q / opq - y * q / opq ** 2)
            else:
                s11 = q * (1 - y + q) / opq ** 2
                lg = (y / b2) * np.log1p(q)
                g11 = -(3.0 / (2 * PI2)) * kk2 * w11 * s11
                g12 = (9.0 / (2 * PI2)) * u * (lg + D * q / opq)
                g2 = -(3.0 / (2 * PI2)) * u * (m2 * s11)
                g3 = (1.0 / (2 * PI2)) * u * (-lg - 2 * D * q / opq + D * y * q / opq ** 2)
            out.extend([g11, g12, g2, g3])
        return np.stack(np.broadcast_arrays(*out), axis=-1)

    return g


def _trapezoid_even(f, spec, floor, n0=16, n_max=8192):
    """Integral over tau in [0, 1] of an integrand even in tau and negligible at 1.

    Such integrands are analytic in a strip about the real axis, so the
    trapezoid rule converges geometrically; the step is halved (reusing all
    previous nodes) until consecutive levels agree.  ``f`` receives the new
    nodes and must return the node sum over them.
    """
    n = n0
    tau = np.arange(n + 1) / n
    w_end = np.zeros(n + 1)
    w_end[0] = 0.5
    w_end[-1] = 0.5
    # evaluate endpoints with weight one half and interior nodes with weight one
    ends = f(tau[[0, -1]]) * 0.5
    interior = f(tau[1:-1])
    node_sum = ends + interior
    total = node_sum / n
    while True:
        new = (2 * np.arange(n) + 1) / (2 * n)
        node_sum = node_sum + f(new)
        n *= 2
        refined = node_sum / n
        err = np.abs(refined - total)
        tol = np.maximum(spec.rel_tol * np.abs(refined), spec.abs_tol)
        tol = np.maximum(tol, floor(refined))
        total = refined
        if np.all(err <= tol):
            return total, True
        if n >= n_max:
            return total, False


# Relative size of rounding error against the species-absolute integral.
ROUNDOFF = 1e-13


def _with_floor(ncomp):
    """Tolerance floor for arrays laid out as [values, magnitudes]."""
    def floor(total):
        mags = np.abs(total[..., ncomp:])
        return np.concatenate([ROUNDOFF * mags, 1e-3 * mags], axis=-1)
    return floor


def thermal_batch(ks, betas, scheme, spec=None, printed=False, which=("mt", "g")):
    """Thermal quantities for the paired arrays ``ks`` and ``betas``.

    The t-integral (inner) runs over [0, t_max] with X_0 cosh t_max equal to
    the smaller of 745 (underflow) and X_0 + 60, beyond which every integrand
    is negligible against its peak.  Returns a dict with keys
    m_thermal and/or g11T, g12T, g2T, g3T, plus ``error`` (shape (n, ncomp)).

    At small beta the species terms grow like beta^-3 and cancel; tolerances
    are floored at the rounding level of the uncancelled terms.
    """
    ks = _check_k(ks)
    betas = _check_beta(betas)
    ks, betas = np.broadcast_arrays(ks, betas)
    ks, betas = ks.astype(float).copy(), betas.astype(float).copy()
    spec = spec or DEFAULT_SPEC
    m, c = _species(scheme)
    m2 = m ** 2
    k2 = ks ** 2
    which = tuple(which)
    ncomp = ("mt" in which) + 4 * ("g" in which)
    g = _thermal_terms(which, printed, m, k2, betas)
    inner_spec = spec.replace(rel_tol=0.1 * spec.rel_tol, abs_tol=0.1 * spec.abs_tol)
    floor = _with_floor(ncomp)
    abs_c = np.abs(c)
    failures = []

    def outer(u):
        x = (u * (1.0 - u))[:, None]                            # (N, 1)
        D = m2[None, None, :] + (x * k2[None, :])[..., None]    # (N, P, J)
        X = betas[None, :, None] * np.sqrt(D)
        x0 = np.min(X, axis=-1)                                 # (N, P)
        t_max = np.arccosh(np.maximum(np.minimum(LOG_UNDERFLOW, x0 + DECAY_MARGIN) / x0, 1.0))
        u4 = u[None, :, None, None]
        x4 = x[None, :, :, None]

        def inner(tau):
            t = tau[:, None, None, None] * t_max[None, :, :, None]   # (T, N, P, 1)
            y = X[None] * np.cosh(t)
            q = np.exp(-y)
            terms = g(u4, x4, t, D[None], y, q) * t_max[None, :, :, None, None]
            val = np.tensordot(terms.sum(axis=0), c, axes=([-2], [0]))
            mag = np.tensordot(np.abs(terms).sum(axis=0), abs_c, axes=([-2], [0]))
            return np.concatenate([val, mag], axis=-1)

        val, ok = _trapezoid_even(inner, inner_spec, floor)
        if not ok:
            failures.append(u)
        if printed and "mt" in which:
            # the non-decaying 2 log 2 / y piece integrates to pi/(2X) in t
            extra = -(8.0 / np.pi) * x[..., None] * (np.pi * math.log(2.0) / X)
            val[..., 0] += extra @ c
            val[..., ncomp] += np.abs(extra) @ abs_c
        return val

    res = integrate_interval(outer, 0.0, 1.0, spec, vectorized=True, floor=floor)
    if failures:
        raise ConvergenceError(
            f"inner t-integral did not converge at k={ks.tolist()}, beta={betas.tolist()}")
    _raise_unless(res, "thermal integral", ks, betas)
    v = res.value[:, :ncomp]
    out = {"error": res.error_estimate[:, :ncomp]}
    col = 0
    if "mt" in which:
        out["m_thermal"] = v[:, 0]
        col = 1
    if "g" in which:
        for i, key in enumerate(THERMAL_KEYS):
            out[key] = v[:, col + i]
    return out


def m_thermal(k, beta, scheme, spec=None):
    """M^T(k, beta) = -(8/pi) int du u(1-u) int dt sum_j c_j / (1 + e^{X_j cosh t})."""
    return float(thermal_batch([k], [beta], scheme, spec, which=("mt",))["m_thermal"][0])


def m_thermal_as_printed(k, beta, scheme, spec=None):
    """M^T evaluated with the alternative bracket listed in PRINTED_NOTES."""
    return float(thermal_batch([k], [beta], scheme, spec, printed=True,
                               which=("mt",))["m_thermal"][0])


@dataclass(frozen=True)
class GammaParts:
    """Four named Gamma components and their sum."""

    values: dict

    def __getitem__(self, key):
        if key == "sum":
            return self.sum
        return self.values[key]

    def __getattr__(self, key):
        try:
            return self.__dict__["values"][key]
        except KeyError:
            raise AttributeError(key) from None

    @property
    def sum(self):
        return float(math.fsum(self.values.values()))

    def as_dict(self):
        return dict(self.values, sum=self.sum)


def gamma_zero_part(k, scheme, spec=None, printed=False):
    """Zero-temperature Gamma components g11, g12, g2, g3.

    With the default forms the four pieces sum to zero identically, as
    Lorentz invariance requires at T = 0.
    """
    r = zero_temperature_batch([k], scheme, spec, printed)
    return GammaParts({key: float(r[key][0]) for key in ZERO_KEYS})


def gamma_thermal_part(k, beta, scheme, spec=None, printed=False):
    """Thermal Gamma components g11T, g12T, g2T, g3T."""
    r = thermal_batch([k], [beta], scheme, spec, printed, which=("g",))
    return GammaParts({key: float(r[key][0]) for key in THERMAL_KEYS})


@dataclass(frozen=True)
class MultiplierSample:
    k: float
    beta: object
    m_zero: float
    m_thermal: float
    gamma_zero: dict
    gamma_thermal: dict
    gamma_total: float
    error_estimate: float

    @property
    def gamma_over_k2(self):
        return None if self.k == 0 else self.gamma_total / self.k ** 2


def samples_batch(ks, beta, scheme, spec=None, printed=False, which=("m0", "mt", "gamma")):
    """MultiplierSample for every k at a single beta.

    Quantities not listed in ``which`` are reported as NaN.
    """
    ks = _check_k(ks)
    beta = float(_check_beta(beta)[0])
    n = ks.size
    nan = np.full(n, np.nan)
    zero = zero_temperature_batch(ks, scheme, spec, printed) if ("m0" in which or "gamma" in which) \
        else None
    th_which = tuple(w for w, flag in (("mt", "mt" in which), ("g", "gamma" in which)) if flag)
    th = thermal_batch(ks, np.full(n, beta), scheme, spec, printed, th_which) if th_which else None
    samples = []
    for i in range(n):
        err = 0.0
        m0 = float(zero["m_zero"][i]) if zero is not None and "m0" in which else math.nan
        mt = float(th["m_thermal"][i]) if th is not None and "mt" in which else math.nan
        if "gamma" in which:
            gz = {key: float(zero[key][i]) for key in ZERO_KEYS}
            gt = {key: float(th[key][i]) for key in THERMAL_KEYS}
            total = math.fsum(list(gz.values()) + list(gt.values()))
            err += float(np.sum(zero["error"][i, 1:]))
            err += float(np.sum(th["error"][i][-4:]))
        else:
            gz = {key: math.nan for key in ZERO_KEYS}
            gt = {key: math.nan for key in THERMAL_KEYS}
            total = math.nan
        if "m0" in which:
            err += float(zero["error"][i, 0])
        if "mt" in which:
            err += float(th["error"][i][0])
        samples.append(MultiplierSample(float(ks[i]), beta, m0, mt, gz, gt, total, err))
    del nan
    return samples


def gamma(k, beta, scheme, spec=None, printed=False):
    """Full multiplier sample at (k, beta) including the eight Gamma components."""
    return samples_batch([k], beta, scheme, spec, printed)[0]


def gamma_total_batch(ks, betas, scheme, spec=None, printed=False):
    """Gamma(k_i, beta_i) for paired arrays, with absolute error estimates."""
    ks = _check_k(ks)
    betas = _check_beta(betas)
    ks, betas = np.broadcast_arrays(ks, betas)
    uk, inv = np.unique(ks, return_inverse=True)
    zero = zero_temperature_batch(uk, scheme, spec, printed)
    th = thermal_batch(ks, betas, scheme, spec, printed, which=("g",))
    z = sum(zero[key] for key in ZERO_KEYS)[inv]
    t = sum(th[key] for key in THERMAL_KEYS)
    err = np.sum(zero["error"][:, 1:], axis=1)[inv] + np.sum(th["error"], axis=1)
    return z + t, err


def gamma_beta_averaged(k, beta, scheme, spec=None):
    """(1/beta) int_0^beta Gamma(k, b) db by adaptive open quadrature in b."""
    return float(gamma_beta_averaged_batch([k], beta, scheme, spec).value[0])


def gamma_beta_averaged_batch(ks, beta, scheme, spec=None):
    """beta-average of Gamma for several k at once; returns a QuadratureResult."""
    ks = _check_k(ks)
    beta = float(_check_beta(beta)[0])
    spec = spec or DEFAULT_SPEC
    inner = spec.replace(rel_tol=0.1 * spec.rel_tol)

    def g(b):
        kk = np.repeat(ks[None, :], b.size, axis=0).ravel()
        bb = np.repeat(b[:, None], ks.size, axis=1).ravel()
        val, _ = gamma_total_batch(kk, bb, scheme, inner)
        return val.reshape(b.size, ks.size)

    res = beta_average(g, beta, spec, vectorized=True)
    _raise_unless(res, "beta-average of Gamma", ks, [beta])
    return res


# ---------------------------------------------------------------- table ---

@dataclass(frozen=True)
class MultiplierTable:
    scheme: PauliVillarsScheme
    beta: float
    samples: tuple
    k_spacing: str = "linear"

    def __post_init__(self):
        ks = [s.k for s in self.samples]
        if any(b <= a for a, b in zip(ks, ks[1:])):
            raise DomainError("table samples must be strictly increasing in k")
        if self.k_spacing not in ("linear", "log"):
            raise DomainError("k_spacing must be 'linear' or 'log'")

    def to_csv(self):
        lines = ["k,M0,MT,Gamma,Gamma_over_k2,err"]
        for s in self.samples:
            cells = [s.k, s.m_zero, s.m_thermal, s.gamma_total,
                     s.gamma_over_k2 if not math.isnan(s.gamma_total) else None, s.error_estimate]
            lines.append(",".join("" if v is None or (isinstance(v, float) and math.isnan(v))
                                  else fmt_float(v) for v in cells))
        return "\n".join(lines) + "\n"


TABLE_CHUNK = 8


def build_table(scheme, beta, k_grid, spec=None, quantities=("m0", "mt", "gamma"),
                k_spacing="linear", workers=None):
    """Evaluate the multipliers on ``k_grid`` at inverse temperature ``beta``.

    The grid is split into fixed-size chunks independent of the worker count,
    so the table is bit-identical however many workers run.
    """
    from .parallel import map_ordered

    ks = np.asarray(k_grid, dtype=float)
    chunks = [ks[i:i + TABLE_CHUNK] for i in range(0, ks.size, TABLE_CHUNK)]
    jobs = [(chunk, beta, scheme, spec, tuple(quantities)) for chunk in chunks]
    results = map_ordered(_table_chunk, jobs, workers)
    samples = tuple(s for part in results for s in part)
    return MultiplierTable(scheme, float(beta), samples, k_spacing)


def _table_chunk(job):
    chunk, beta, scheme, spec, quantities = job
    return samples_batch(chunk, beta, scheme, spec, which=quantities)
