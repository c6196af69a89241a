"""Pauli-Villars mass/coefficient schemes with two auxiliary masses."""

import json
import math
from dataclasses import dataclass

import numpy as np

from ._format import to_json
from .errors import (ConvergenceError, DegenerateSchemeError, DomainError,
                     InfeasibleCutoffError)


@dataclass(frozen=True)
class PauliVillarsScheme:
    """Masses m0 < m1 < m2, coefficients (1, c1, c2) and the averaged cutoff."""

    m0: float
    m1: float
    m2: float
    c0: float
    c1: float
    c2: float
    cutoff: float

    @property
    def masses(self):
        return np.array([self.m0, self.m1, self.m2])

    @property
    def coefficients(self):
        return np.array([self.c0, self.c1, self.c2])

    def sum_c(self):
        return float(np.sum(self.coefficients))

    def sum_c_m2(self):
        return float(np.sum(self.coefficients * self.masses ** 2))

    def check(self):
        """Raise DomainError if any scheme invariant is violated."""
        c, m = self.coefficients, self.masses
        if self.c0 != 1.0 or not (self.m2 > self.m1 > self.m0 > 0):
            raise DomainError("scheme must have c0 = 1 and m2 > m1 > m0 > 0")
        if abs(self.sum_c()) > 1e-14 * np.max(np.abs(c)):
            raise DomainError(f"sum of coefficients is {self.sum_c():.3e}")
        if abs(self.sum_c_m2()) > 1e-12 * np.max(np.abs(c * m ** 2)):
            raise DomainError(f"sum of c_j m_j^2 is {self.sum_c_m2():.3e}")
        if not (self.c1 < 0 < self.c2):
            raise DomainError("need c1 < 0 < c2")
        log_l2 = -np.sum(c * np.log(m ** 2))
        if abs(math.log(self.cutoff ** 2) - log_l2) > 1e-12 * max(1.0, abs(log_l2)):
            raise DomainError("cutoff inconsistent with masses")
        return self

    def to_dict(self):
        return {"m": [self.m0, self.m1, self.m2], "c": [self.c0, self.c1, self.c2],
                "cutoff": self.cutoff}

    def to_json(self):
        return to_json(self.to_dict()) + "\n"

    @classmethod
    def from_json(cls, text):
        """Rebuild from the JSON form, re-deriving coefficients from the masses."""
        data = json.loads(text)
        try:
            m0, m1, m2 = (float(x) for x in data["m"])
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError(f"malformed scheme document: {exc}") from None
        scheme = scheme_from_masses(m0, m1, m2)
        if "c" in data:
            given = np.asarray(data["c"], dtype=float)
            if given.shape != (3,) or not np.allclose(given, scheme.coefficients, rtol=1e-12, atol=0):
                raise DomainError("coefficients in document do not match the masses")
        return scheme


@dataclass(frozen=True)
class WeightedSpecies:
    """Mass/coefficient list without scheme constraints.

    Used only to demonstrate what happens when the regulator cancellations
    are absent, e.g. a single unregulated species.
    """

    masses: np.ndarray
    coefficients: np.ndarray

    def __init__(self, masses, coefficients):
        object.__setattr__(self, "masses", np.asarray(masses, dtype=float))
        object.__setattr__(self, "coefficients", np.asarray(coefficients, dtype=float))
        if self.masses.shape != self.coefficients.shape or np.any(self.masses <= 0):
            raise DomainError("masses must be positive and match the coefficients")

    @property
    def m0(self):
        return float(np.min(self.masses))


def _log_cutoff_sq(m0, m1, m2, c1, c2):
    return -(math.log(m0 * m0) + c1 * math.log(m1 * m1) + c2 * math.log(m2 * m2))


def _coefficients(m0, m1, m2):
    den = m2 * m2 - m1 * m1
    if den == 0:
        raise DegenerateSchemeError("m1 == m2 makes the coefficients singular")
    return (m0 * m0 - m2 * m2) / den, (m1 * m1 - m0 * m0) / den


def scheme_from_masses(m0, m1, m2):
    """Build the scheme whose coefficients cancel the two leading divergences."""
    m0, m1, m2 = float(m0), float(m1), float(m2)
    if not all(math.isfinite(x) and x > 0 for x in (m0, m1, m2)):
        raise DomainError("masses must be positive and finite")
    if m1 == m2:
        raise DegenerateSchemeError("m1 == m2 makes the coefficients singular")
    if not m0 < m1 < m2:
        raise DomainError(f"need m0 < m1 < m2, got ({m0}, {m1}, {m2})")
    c1, c2 = _coefficients(m0, m1, m2)
    cutoff = math.exp(0.5 * _log_cutoff_sq(m0, m1, m2, c1, c2))
    return PauliVillarsScheme(m0, m1, m2, 1.0, c1, c2, cutoff).check()


def _cutoff_for(m0, m1, ratio):
    m2 = ratio * m1
    c1, c2 = _coefficients(m0, m1, m2)
    return math.exp(0.5 * _log_cutoff_sq(m0, m1, m2, c1, c2))


def scheme_from_cutoff(m0, target_cutoff, mass_ratio=2.0, *, rel_tol=1e-12, max_iter=200):
    """Find m1 (with m2 = mass_ratio * m1) so the averaged cutoff hits the target.

    The cutoff increases monotonically with m1 at fixed ratio and tends to m0
    as m1 approaches m0, so a bracketed bisection is used.
    """
    m0, target, ratio = float(m0), float(target_cutoff), float(mass_ratio)
    if not (m0 > 0 and target > 0):
        raise DomainError("m0 and target cutoff must be positive")
    if not ratio > 1:
        raise DomainError("mass_ratio must exceed 1")
    lo = m0 * (1.0 + 1e-9)
    if target <= _cutoff_for(m0, lo, ratio):
        raise InfeasibleCutoffError(
            f"cutoff {target} is not reachable above m0={m0} at ratio {ratio}")
    hi = 2.0 * m0
    for _ in range(max_iter):
        if _cutoff_for(m0, hi, ratio) >= target:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise ConvergenceError("could not bracket the requested cutoff", estimate=hi)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if _cutoff_for(m0, mid, ratio) < target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= rel_tol * hi:
            break
    else:
        raise ConvergenceError("bisection did not converge", estimate=0.5 * (lo + hi))
    m1 = 0.5 * (lo + hi)
    return scheme_from_masses(m0, m1, ratio * m1)


DEFAULT_SCHEME_MASSES = (1.0, 2.0, 3.0)


def default_scheme():
    return scheme_from_masses(*DEFAULT_SCHEME_MASSES)
