"""Quadratic free energy F2 of a field configuration and remainder factors."""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from ._format import to_json
from .errors import DomainError, GaugeError
from .fields import field_spectra_and_norms, grid_metadata
from .multipliers import (THERMAL_KEYS, ZERO_KEYS, _species, thermal_batch, zero_temperature_batch)
from .parallel import map_ordered
from .quadrature import DEFAULT_SPEC, QuadratureSpec, integrate_interval

MAX_NODES = 512
GAUSS_POINTS = 16
SENTINELS = 5
CHUNK = 8


@dataclass(frozen=True)
class RemainderFactors:
    factor4: float
    factor6: float
    bound: float


def remainder_factors(l2_F_squared, scheme, kappa=1.0):
    """kappa-weighted quartic and sextic bounds on the higher-order remainder."""
    if l2_F_squared < 0:
        raise DomainError("l2_F_squared must be non-negative")
    if not kappa > 0:
        raise DomainError("kappa must be positive")
    m, c = _species(scheme)
    s4 = math.fsum(np.abs(c) / m)
    s6 = math.fsum(np.abs(c) / m ** 2)
    f4 = s4 * l2_F_squared ** 2
    f6 = s6 * l2_F_squared ** 3
    return RemainderFactors(f4, f6, kappa * (f4 + f6))


@dataclass(frozen=True)
class FreeEnergyReport:
    f2_total: float
    magnetic_electric_part: float
    gamma_part: float
    remainder_factor_4: float
    remainder_factor_6: float
    kappa: float
    quadrature_diagnostics: dict = field(default_factory=dict)
    beta: float = math.nan
    scheme: dict = field(default_factory=dict)
    grid: dict = field(default_factory=dict)
    l2_F_squared: float = 0.0
    l1_E: float = 0.0

    @property
    def remainder_bound(self):
        return self.kappa * (self.remainder_factor_4 + self.remainder_factor_6)

    def to_dict(self):
        return {
            "f2_total": self.f2_total,
            "magnetic_electric_part": self.magnetic_electric_part,
            "gamma_part": self.gamma_part,
            "remainder_factor_4": self.remainder_factor_4,
            "remainder_factor_6": self.remainder_factor_6,
            "remainder_bound": self.remainder_bound,
            "kappa": self.kappa,
            "beta": self.beta,
            "l2_F_squared": self.l2_F_squared,
            "l1_E": self.l1_E,
            "scheme": self.scheme,
            "grid": self.grid,
            "quadrature_diagnostics": self.quadrature_diagnostics,
        }

    def to_json(self):
        return to_json(self.to_dict()) + "\n"


def _node_job(job):
    """Multipliers on one chunk of k nodes: M0, M^T and the Gauss b-average of Gamma."""
    ks, beta, scheme, spec, need_m, need_g, n_gauss = job
    out = {}
    err = np.zeros(ks.size)
    if need_m or need_g:
        zero = zero_temperature_batch(ks, scheme, spec)
        out["m_zero"] = zero["m_zero"]
        gz = sum(zero[key] for key in ZERO_KEYS)
        err += np.sum(zero["error"], axis=1)
    if need_m:
        th = thermal_batch(ks, np.full(ks.size, beta), scheme, spec, which=("mt",))
        out["m_thermal"] = th["m_thermal"]
        err += th["error"][:, 0]
    if need_g:
        x, w = np.polynomial.legendre.leggauss(n_gauss)
        bs = 0.5 * beta * (x + 1.0)
        kk = np.repeat(ks, n_gauss)
        bb = np.tile(bs, ks.size)
        th = thermal_batch(kk, bb, scheme, spec, which=("g",))
        gt = sum(th[key] for key in THERMAL_KEYS).reshape(ks.size, n_gauss)
        out["gamma_avg"] = gz + 0.5 * gt @ w
        err += 0.5 * np.sum(th["error"], axis=1).reshape(ks.size, n_gauss) @ np.abs(w)
    out["error"] = err
    return out


def _choose_nodes(kmag, max_nodes):
    unique = np.unique(kmag)
    if unique.size <= max_nodes:
        return unique, False
    s = np.linspace(0.0, math.log1p(unique[-1]), max_nodes)
    nodes = np.expm1(s)
    nodes[0], nodes[-1] = 0.0, unique[-1]
    return nodes, True


def _on_lattice(values, nodes, interpolated, kmag):
    if not interpolated:
        idx = np.searchsorted(nodes, kmag)
        return values[idx]
    spline = CubicSpline(np.log1p(nodes), values)
    return spline(np.log1p(kmag))


def quadratic_free_energy(spectral, beta, scheme, spec=None, kappa=1.0, workers=None,
                          max_nodes=MAX_NODES, gauss_points=GAUSS_POINTS):
    """Assemble F2 from the field spectra and the radial multipliers.

    Multipliers are computed on at most ``max_nodes`` distinct |k| values and
    mapped to the lattice exactly or by cubic interpolation in log(1 + |k|).
    The beta-average of Gamma uses a fixed Gauss rule, checked against a rule
    of twice the order at a few sentinel magnitudes.
    """
    if not spectral.gauge_projected:
        raise GaugeError("spectral field must be Coulomb-projected first")
    if not beta > 0:
        raise DomainError("beta must be positive")
    spec = spec or DEFAULT_SPEC
    spectra = field_spectra_and_norms(spectral)
    kmag = spectral.k_magnitude()
    e_spec, b_spec = spectra.e_spectrum, spectra.b_spectrum
    need_m = bool(np.any(e_spec) or np.any(b_spec))
    need_g = bool(np.any(e_spec))
    nodes, interpolated = _choose_nodes(kmag, max_nodes)
    diag = {"nodes": int(nodes.size), "interpolated": interpolated,
            "gauss_points": int(gauss_points), "rel_tol": spec.rel_tol}
    dk = spectral.k_cell_volume
    me_part = 0.0
    g_part = 0.0
    if need_m:
        chunks = [nodes[i:i + CHUNK] for i in range(0, nodes.size, CHUNK)]
        jobs = [(ch, float(beta), scheme, spec, need_m, need_g, gauss_points) for ch in chunks]
        sentinel_idx = np.unique(np.linspace(nodes.size // 8, nodes.size - 1, SENTINELS).astype(int))
        sentinel_idx = sentinel_idx[nodes[sentinel_idx] > 0]
        if need_g and sentinel_idx.size:
            jobs.append((nodes[sentinel_idx], float(beta), scheme, spec, False, True,
                         2 * gauss_points))
        results = map_ordered(_node_job, jobs, workers)
        main = results[:len(chunks)]
        m_sum = np.concatenate([r["m_zero"] + r["m_thermal"] for r in main])
        diag["max_error_estimate"] = float(max(np.max(r["error"]) for r in main))
        m_lat = _on_lattice(m_sum, nodes, interpolated, kmag)
        me_part = math.fsum((m_lat * (b_spec - e_spec)).ravel()) * dk / (8 * np.pi)
        if need_g:
            g_avg = np.concatenate([r["gamma_avg"] for r in main])
            if sentinel_idx.size:
                fine = results[-1]["gamma_avg"]
                coarse = g_avg[sentinel_idx]
                rel = np.abs(fine - coarse) / np.maximum(np.abs(fine), 1e-300)
                diag["sentinel_k"] = nodes[sentinel_idx].tolist()
                diag["gauss_doubling_max_rel_change"] = float(np.max(rel))
            g_lat = _on_lattice(g_avg, nodes, interpolated, kmag)
            # |E(k)|^2 / |k|^2 = |V(k)|^2, which also gives the k = 0 cell its limit
            v_spec = np.abs(spectral.v_hat) ** 2
            g_part = math.fsum((g_lat * v_spec).ravel()) * dk
    rem = remainder_factors(spectra.l2_F_squared, scheme, kappa)
    scheme_echo = scheme.to_dict() if hasattr(scheme, "to_dict") else {}
    return FreeEnergyReport(
        f2_total=me_part + g_part, magnetic_electric_part=me_part, gamma_part=g_part,
        remainder_factor_4=rem.factor4, remainder_factor_6=rem.factor6, kappa=float(kappa),
        quadrature_diagnostics=diag, beta=float(beta), scheme=scheme_echo,
        grid=grid_metadata(spectral), l2_F_squared=spectra.l2_F_squared, l1_E=spectra.l1_E)


def gaussian_electric_reference(beta, scheme, amplitude=1.0, width=1.0, spec=None,
                                gauss_points=24):
    """F2 of V = amplitude exp(-r^2/(2 width^2)) in free space by radial quadrature.

    Uses |E(k)|^2 = amplitude^2 width^6 k^2 exp(-width^2 k^2), an adaptive rule
    in k and a ``gauss_points`` Gauss rule in b, independently of the lattice path.
    """
    spec = spec or QuadratureSpec(rel_tol=1e-8)
    if not beta > 0:
        raise DomainError("beta must be positive")
    k_max = 12.0 / width
    x, w = np.polynomial.legendre.leggauss(gauss_points)
    bs = 0.5 * beta * (x + 1.0)

    def f(k):
        v2 = amplitude ** 2 * width ** 6 * np.exp(-(width * k) ** 2)
        zero = zero_temperature_batch(k, scheme, spec)
        th = thermal_batch(k, np.full(k.size, beta), scheme, spec, which=("mt",))
        msum = zero["m_zero"] + th["m_thermal"]
        gz = sum(zero[key] for key in ZERO_KEYS)
        tg = thermal_batch(np.repeat(k, gauss_points), np.tile(bs, k.size), scheme, spec,
                           which=("g",))
        gt = sum(tg[key] for key in THERMAL_KEYS).reshape(k.size, gauss_points)
        gbar = gz + 0.5 * gt @ w
        radial = 4 * np.pi * k * k
        return radial * v2 * (-(msum / (8 * np.pi)) * k * k + gbar)

    res = integrate_interval(f, 0.0, k_max, spec, vectorized=True)
    if not res.converged:
        from .errors import ConvergenceError
        raise ConvergenceError("radial reference did not converge", estimate=res.value,
                               error_estimate=res.error_estimate)
    return float(res.value)
