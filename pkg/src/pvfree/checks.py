"""Verification suites run by ``pvfree verify``.

Each suite returns a list of CheckResult; the CLI prints one line per check
and turns any failure into a non-zero exit code.
"""

import math
import time
import warnings
from dataclasses import dataclass

import numpy as np

from ._format import fmt_float
from .errors import OracleAccuracyError


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    passed: bool
    detail: str = ""

    def as_dict(self):
        return {"suite": self.suite, "name": self.name, "detail": self.detail}

    def line(self):
        return f"{'PASS' if self.passed else 'FAIL'} [{self.suite}] {self.name}: {self.detail}"


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


class _Collector:
    def __init__(self, suite):
        self.suite = suite
        self.results = []

    def check(self, name, passed, detail=""):
        self.results.append(CheckResult(self.suite, name, bool(passed), detail))

    def guard(self, name, fn):
        """Run ``fn``; an exception becomes a failed check instead of aborting the suite."""
        try:
            fn()
        except Exception as exc:  # noqa: BLE001 - reported as a failure line
            self.check(name, False, f"{type(exc).__name__}: {exc}")


# ------------------------------------------------------------------ suites ---

def suite_pv(spec):
    from .pv_scheme import scheme_from_cutoff, scheme_from_masses

    c = _Collector("pv")

    def worked():
        s = scheme_from_masses(1.0, 2.0, 3.0)
        c.check("coefficients (1,-1.6,0.6)",
                np.allclose(s.coefficients, [1.0, -1.6, 0.6], rtol=0, atol=1e-14),
                str([fmt_float(x) for x in s.coefficients]))
        c.check("sum c_j", abs(s.sum_c()) <= 1e-14, fmt_float(s.sum_c()))
        c.check("sum c_j m_j^2", abs(s.sum_c_m2()) <= 1e-12, fmt_float(s.sum_c_m2()))
        c.check("cutoff 1.56811", abs(s.cutoff - 1.56811) <= 1e-4, fmt_float(s.cutoff))

    def round_trip():
        worst = 0.0
        for ratio in (1.5, 2.0, 4.0):
            for target in np.geomspace(1.5, 1e4, 12):
                s = scheme_from_cutoff(1.0, target, ratio)
                worst = max(worst, _rel(s.cutoff, target))
        c.check("cutoff round trip", worst <= 1e-8, f"max rel error {worst:.2e}")

    def bounded():
        for ratio in (1.5, 2.0, 4.0):
            big = max(max(abs(s.c1), abs(s.c2)) for s in
                      (scheme_from_cutoff(1.0, t, ratio) for t in np.geomspace(2.0, 1e4, 10)))
            bound = (ratio ** 2 + 1) / (ratio ** 2 - 1) + 1
            c.check(f"bounded coefficients ratio={ratio}", big <= bound,
                    f"max |c| {big:.4f} <= {bound:.4f}")

    for name, fn in (("worked scheme", worked), ("round trip", round_trip), ("bounded", bounded)):
        c.guard(name, fn)
    return c.results


def suite_theta(spec):
    from .special_functions import theta2

    c = _Collector("theta")
    for s in (0.05, 0.5, 5.0):
        for beta in (0.5, 2.0, 10.0):
            def one(s=s, beta=beta):
                d = theta2(s, beta, "direct")
                p = theta2(s, beta, "poisson")
                c.check(f"s={s} beta={beta}", _rel(p, d) <= 1e-10,
                        f"direct {fmt_float(d)} poisson {fmt_float(p)} rel {_rel(p, d):.1e}")
            c.guard(f"s={s} beta={beta}", one)
    return c.results


def suite_bessel(spec):
    from .matsubara_oracles import bessel_integral_identity_check
    from .special_functions import bessel_k

    c = _Collector("bessel")
    for x in (0.5, 1.0, 5.0):
        def half(x=x):
            exact = math.sqrt(math.pi / (2 * x)) * math.exp(-x)
            v = bessel_k(0.5, x)
            c.check(f"K_1/2({x}) closed form", _rel(v, exact) <= 1e-8, f"rel {_rel(v, exact):.1e}")
        c.guard(f"K_1/2({x})", half)
    for nu, alpha, gam in ((0.0, 1.0, 1.0), (1.0, 1.0, 1.0), (0.5, 0.25, 4.0)):
        def ident(nu=nu, alpha=alpha, gam=gam):
            r = bessel_integral_identity_check(nu, alpha, gam)
            c.check(f"integral identity nu={nu} alpha={alpha} gamma={gam}",
                    _rel(r.lhs, r.rhs_corrected) <= 1e-6,
                    f"lhs {fmt_float(r.lhs)} rhs {fmt_float(r.rhs_corrected)}")
        c.guard(f"identity nu={nu}", ident)

    def printed():
        r = bessel_integral_identity_check(0.0, 1.0, 1.0)
        c.check("printed argument diverges at nu=0", math.isinf(r.rhs_as_printed),
                f"rhs_as_printed {r.rhs_as_printed}")
    c.guard("printed argument", printed)

    def monotone():
        for nu in (0.0, 0.5, 1.0, 2.5):
            xs = np.geomspace(0.05, 50, 25)
            vals = [bessel_k(nu, x) for x in xs]
            c.check(f"K_{nu} decreasing", all(b < a for a, b in zip(vals, vals[1:])), "25 points")
    c.guard("monotone", monotone)
    return c.results


def suite_fermi(spec):
    from .special_functions import fermi_thermo, matsubara_frequency, x_tanh_x_partial

    c = _Collector("fermi")

    def identity():
        rng = np.random.default_rng(20240601)
        lam = rng.uniform(-50, 50, 100)
        beta = 10 ** rng.uniform(-2, 2, 100)
        worst = 0.0
        for la, be in zip(lam, beta):
            t = fermi_thermo(la, be)
            lhs = la * (t.occupation - 0.5) - t.entropy / be
            a = abs(be * la)
            rhs = -(0.5 * a + math.log1p(math.exp(-a))) / be
            worst = max(worst, abs(lhs - rhs) / max(1.0, abs(la)))
        c.check("free-energy identity on 100 points", worst <= 1e-12, f"max scaled error {worst:.1e}")
        big = fermi_thermo(50.0, 100.0)
        c.check("overflow-safe at beta*lam=5000", all(math.isfinite(v) for v in
                (big.occupation, big.entropy, big.free_energy_density)), "finite outputs")

    def partial():
        for x in (0.3, 1.0, 4.0):
            vals = [x_tanh_x_partial(x, L) for L in (1, 2, 5, 10, 100, 1000)]
            ok = all(b >= a for a, b in zip(vals, vals[1:])) and vals[-1] <= x * math.tanh(x)
            c.check(f"x tanh x partial sums x={x}", ok, f"last {fmt_float(vals[-1])}")

    def frequencies():
        ls = np.arange(-10 ** 6, 10 ** 6 + 1)
        c.check("Matsubara frequencies nonzero", bool(np.all(matsubara_frequency(ls, 1.0) != 0)),
                "l in [-1e6, 1e6]")

    for name, fn in (("identity", identity), ("partial", partial), ("frequencies", frequencies)):
        c.guard(name, fn)
    return c.results


def suite_quadrature(spec):
    from .quadrature import QuadratureSpec, beta_average, integrate_half_line, integrate_interval

    c = _Collector("quadrature")

    def examples():
        r = integrate_interval(lambda u: u * (1 - u), 0.0, 1.0, vectorized=True)
        c.check("u(1-u) -> 1/6", _rel(r.value, 1 / 6) <= 1e-12, fmt_float(r.value))
        r = integrate_interval(lambda u: 1 / np.sqrt(u), 0.0, 1.0, vectorized=True)
        c.check("1/sqrt(u) -> 2", r.converged and _rel(r.value, 2.0) <= 1e-9, fmt_float(r.value))
        r = integrate_half_line(lambda r: 4 * np.pi * r ** 4 * np.exp(-r * r), vectorized=True)
        c.check("4 pi r^4 exp(-r^2)", _rel(r.value, 1.5 * np.pi ** 1.5) <= 1e-9, fmt_float(r.value))
        r = beta_average(lambda b: b, 2.0, vectorized=True)
        c.check("average of b over (0,2]", _rel(r.value, 1.0) <= 1e-12, fmt_float(r.value))
        r = beta_average(lambda b: np.full_like(b, 3.7), 0.3, vectorized=True)
        c.check("average of a constant", _rel(r.value, 3.7) <= 1e-14, fmt_float(r.value))

    def halving():
        ints = [(lambda u: u * (1 - u), 1 / 6), (lambda u: 1 / np.sqrt(u), 2.0),
                (lambda u: np.exp(np.sin(3 * u)), None)]
        for i, (f, _) in enumerate(ints):
            ref = integrate_interval(f, 0.0, 1.0, QuadratureSpec(rel_tol=1e-13), vectorized=True).value
            errs = [abs(integrate_interval(f, 0.0, 1.0, QuadratureSpec(rel_tol=t), vectorized=True).value
                        - ref) for t in (1e-4, 5e-5, 1e-6, 5e-7, 1e-8)]
            ok = all(b <= a or b <= 1e-15 * abs(ref) for a, b in zip(errs, errs[1:]))
            c.check(f"halving rel_tol integral {i}", ok, " ".join(f"{e:.1e}" for e in errs))

    c.guard("examples", examples)
    c.guard("halving", halving)
    return c.results


def suite_uehling(spec):
    from .multipliers import m_zero, uehling
    from .pv_scheme import scheme_from_masses

    c = _Collector("uehling")

    def deficits():
        for k in (0.5, 1.0, 5.0):
            d = []
            for lp in (10.0, 100.0, 1000.0):
                s = scheme_from_masses(1.0, lp, 2 * lp)
                d.append(abs(2 * math.log(s.cutoff) / (3 * math.pi) - m_zero(k, s, spec) - uehling(k)))
            c.check(f"deficit decreasing k={k}", d[0] > d[1] > d[2] and d[2] <= 5e-3,
                    " ".join(f"{x:.2e}" for x in d))
    c.guard("deficits", deficits)
    return c.results


def suite_multipliers(spec):
    from .multipliers import log_sum, samples_batch, thermal_batch
    from .pv_scheme import default_scheme

    s = default_scheme()
    c = _Collector("multipliers")

    def switchover():
        k = math.sqrt(2.0) * s.m2
        worst = max(abs(log_sum(k, u, s, True) - log_sum(k, u, s, False))
                    for u in np.linspace(0.01, 0.99, 21))
        c.check("log-sum switchover at k^2 = 2 m2^2", worst <= 1e-12, f"{worst:.1e}")

    def suppression():
        ks = np.array([0.0, 1.0, 5.0])
        th = thermal_batch(ks, np.full(3, 40.0 / s.m0), s, spec)
        worst = max(float(np.max(np.abs(th[key]))) for key in
                    ("m_thermal", "g11T", "g12T", "g2T", "g3T"))
        gt = np.abs(th["g11T"] + th["g12T"] + th["g2T"] + th["g3T"])
        c.check("thermal suppression at beta m0 = 40", worst <= 1e-10 and np.all(gt <= 1e-10),
                f"max |thermal| {worst:.1e}")

    def continuity_and_bounds():
        # the 399-point grid contains the 200-point grid, so one pass gives both constants
        for beta in (0.5, 1.0, 5.0):
            ks = np.linspace(0.0, 50.0, 399)
            samples = samples_batch(ks, beta, s, spec)
            for attr in ("m_zero", "m_thermal", "gamma_total"):
                v = np.array([getattr(x, attr) for x in samples])
                fine = np.max(np.abs(np.diff(v))) / (ks[1] - ks[0])
                coarse = np.max(np.abs(np.diff(v[::2]))) / (ks[2] - ks[0])
                c.check(f"{attr} Lipschitz constant stable beta={beta}",
                        np.all(np.isfinite(v)) and fine <= 1.5 * coarse,
                        f"C(200) {coarse:.3e} C(399) {fine:.3e}")
            g = np.array([x.gamma_over_k2 for x in samples if x.k >= 0.5])
            c.check(f"Gamma/k^2 bounded beta={beta}", np.all(np.isfinite(g)),
                    f"max |Gamma/k^2| {np.max(np.abs(g)):.3e}")

    for name, fn in (("switchover", switchover), ("suppression", suppression),
                     ("continuity", continuity_and_bounds)):
        c.guard(name, fn)
    return c.results


def suite_gamma_oracle(spec):
    from .matsubara_oracles import (gamma_matsubara_oracle, matsubara_weight_partial_sum,
                                    oracle, oracle_partial_sums)
    from .multipliers import gamma
    from .pv_scheme import WeightedSpecies, default_scheme

    s = default_scheme()
    c = _Collector("gamma-oracle")
    for k, beta in ((0.5, 1.0), (2.0, 0.5), (1.0, 2.0)):
        def one(k=k, beta=beta):
            closed = gamma(k, beta, s, spec).gamma_total
            orc = gamma_matsubara_oracle(k, beta, s).value
            c.check(f"closed form vs oracle k={k} beta={beta}", _rel(closed, orc) <= 1e-3,
                    f"closed {fmt_float(closed)} oracle {fmt_float(orc)} ratio {closed / orc:.6f}")
        c.guard(f"oracle k={k} beta={beta}", one)

    def necessity():
        single = WeightedSpecies((1.0,), (1.0,))
        for kind in ("gamma", "vector", "scalar"):
            try:
                oracle(kind, 1.0, 1.0, single)
                raised = False
            except OracleAccuracyError:
                raised = True
            sums = oracle_partial_sums(kind, 1.0, 1.0, single, (50, 100, 200, 400))
            v = [abs(sums[L]) for L in (50, 100, 200, 400)]
            c.check(f"single species {kind} diverges", raised and v[0] < v[1] < v[2] < v[3],
                    " ".join(f"{x:.3e}" for x in v))
            # linear growth from zero would give S(400) / S(50) = 8
            c.check(f"single species {kind} grows at least linearly", v[3] >= 8 * v[0],
                    f"S(400)/S(50) = {v[3] / v[0]:.3f}")
    c.guard("necessity", necessity)

    def weight_bound():
        worst = max(matsubara_weight_partial_sum(b, 1.0, 2000) for b in np.geomspace(0.01, 100, 15))
        c.check("Matsubara weight sum <= 1/8", worst <= 0.125, fmt_float(worst))
    c.guard("weight bound", weight_bound)
    return c.results


def suite_multiplier_oracle(spec):
    from .matsubara_oracles import beta_averaged_oracle
    from .multipliers import gamma_beta_averaged, m_thermal, m_zero
    from .pv_scheme import default_scheme

    s = default_scheme()
    c = _Collector("multiplier-oracle")
    for k, beta in ((0.5, 1.0), (1.0, 2.0)):
        def one(k=k, beta=beta):
            msum = m_zero(k, s, spec) + m_thermal(k, beta, s, spec)
            vec_closed = k * k / (8 * math.pi) * msum
            vec = beta_averaged_oracle("vector", k, beta, s)
            c.check(f"vector identity k={k} beta={beta}", _rel(vec, vec_closed) <= 1e-3,
                    f"oracle {fmt_float(vec)} closed {fmt_float(vec_closed)}")
            sca_closed = -vec_closed + gamma_beta_averaged(k, beta, s, spec)
            sca = beta_averaged_oracle("scalar", k, beta, s)
            c.check(f"scalar identity k={k} beta={beta}", _rel(sca, sca_closed) <= 1e-3,
                    f"oracle {fmt_float(sca)} closed {fmt_float(sca_closed)}")
        c.guard(f"identities k={k} beta={beta}", one)
    return c.results


def suite_fields(spec):
    from .fields import (GridField, coulomb_project, field_spectra_and_norms, gaussian_test_field,
                         spectral_transform)

    c = _Collector("fields")

    def gaussian():
        g = gaussian_test_field(1.0, 1.0, 64, 20.0)
        sp = field_spectra_and_norms(coulomb_project(spectral_transform(g)))
        c.check("Gaussian ||F||^2 = 8.3525 +- 0.5%", _rel(sp.l2_F_squared, 8.3525) <= 5e-3,
                fmt_float(sp.l2_F_squared))

    def random_fields():
        rng = np.random.default_rng(7)
        n, box = (12, 10, 8), (3.0, 2.5, 2.0)
        f = GridField(n, box, rng.standard_normal(n), tuple(rng.standard_normal(n) for _ in range(3)))
        sp = spectral_transform(f)
        x2 = np.sum(f.v ** 2) * f.cell_volume
        k2 = np.sum(np.abs(sp.v_hat) ** 2) * sp.k_cell_volume
        c.check("Plancherel", _rel(k2, x2) <= 1e-12, f"rel {_rel(k2, x2):.1e}")
        p1 = coulomb_project(sp)
        p2 = coulomb_project(p1)
        diff = max(float(np.max(np.abs(a - b))) for a, b in zip(p1.a_hat, p2.a_hat))
        scale = max(float(np.max(np.abs(a))) for a in p1.a_hat)
        c.check("projector idempotent", diff <= 1e-15 * max(scale, 1.0), f"{diff:.1e}")
        n_in = sum(np.sum(np.abs(a) ** 2) for a in sp.a_hat)
        n_out = sum(np.sum(np.abs(a) ** 2) for a in p1.a_hat)
        c.check("projector non-expansive", n_out <= n_in, f"{n_out:.6e} <= {n_in:.6e}")

    def translation():
        g = gaussian_test_field(1.0, 1.0, 32, 16.0)
        shifted = GridField(g.n, g.box_length, np.roll(g.v, (3, -2, 5), axis=(0, 1, 2)), g.a)
        a = field_spectra_and_norms(coulomb_project(spectral_transform(g)))
        b = field_spectra_and_norms(coulomb_project(spectral_transform(shifted)))
        d = float(np.max(np.abs(a.e_spectrum - b.e_spectrum)) / np.max(a.e_spectrum))
        c.check("spectra translation invariant", d <= 1e-12, f"{d:.1e}")

    for name, fn in (("gaussian", gaussian), ("random", random_fields), ("translation", translation)):
        c.guard(name, fn)
    return c.results


def suite_free_energy(spec):
    from .fields import GridField, coulomb_project, gaussian_test_field, spectral_transform
    from .free_energy import quadratic_free_energy, remainder_factors
    from .pv_scheme import default_scheme

    s = default_scheme()
    c = _Collector("free-energy")

    def remainders():
        r = remainder_factors(1.0, s)
        c.check("sum |c|/m = 2", abs(r.factor4 - 2.0) <= 1e-14, fmt_float(r.factor4))
        c.check("sum |c|/m^2 = 1.4666667", abs(r.factor6 - 22 / 15) <= 1e-14, fmt_float(r.factor6))
        vals = [remainder_factors(x, s).bound for x in (0.0, 0.1, 1.0, 10.0)]
        c.check("remainder monotone", vals[0] == 0 and all(b > a for a, b in zip(vals, vals[1:])),
                " ".join(fmt_float(v) for v in vals))

    def scaling():
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            g = gaussian_test_field(1.0, 1.0, 12, 8.0)
        rng = np.random.default_rng(3)
        a = tuple(rng.standard_normal(g.n) * 0.1 for _ in range(3))
        base = GridField(g.n, g.box_length, g.v, a)
        r1 = quadratic_free_energy(coulomb_project(spectral_transform(base)), 1.0, s, spec)
        alpha = 3.0
        r2 = quadratic_free_energy(coulomb_project(spectral_transform(base.scaled(alpha))), 1.0, s, spec)
        e1 = _rel(r2.magnetic_electric_part, alpha ** 2 * r1.magnetic_electric_part)
        e2 = _rel(r2.gamma_part, alpha ** 2 * r1.gamma_part)
        c.check("quadratic scaling", max(e1, e2) <= 1e-12, f"{e1:.1e} {e2:.1e}")
        zero = GridField(g.n, g.box_length, np.zeros(g.n), (np.zeros(g.n),) * 3)
        rz = quadratic_free_energy(coulomb_project(spectral_transform(zero)), 1.0, s, spec)
        c.check("zero field", rz.f2_total == 0 and rz.remainder_bound == 0, fmt_float(rz.f2_total))

    c.guard("remainders", remainders)
    c.guard("scaling", scaling)
    return c.results


SUITES = {
    "pv": suite_pv,
    "theta": suite_theta,
    "bessel": suite_bessel,
    "fermi": suite_fermi,
    "quadrature": suite_quadrature,
    "uehling": suite_uehling,
    "multipliers": suite_multipliers,
    "fields": suite_fields,
    "free-energy": suite_free_energy,
    "gamma-oracle": suite_gamma_oracle,
    "multiplier-oracle": suite_multiplier_oracle,
}


def run_suites(names, spec, out=None):
    """Run the named suites in order, writing one line per check to ``out``."""
    results = []
    for name in names:
        start = time.perf_counter()
        part = SUITES[name](spec)
        if out is not None:
            for r in part:
                out.write(r.line() + "\n")
            out.write(f"suite {name}: {sum(r.passed for r in part)}/{len(part)} passed "
                      f"in {time.perf_counter() - start:.1f} s\n")
            out.flush()
        results.extend(part)
    return results
