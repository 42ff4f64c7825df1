"""Approximation of diagonal Zhou weights on the unit polydisc by multiplier ideals.

The extremal families are restricted to monomials: ``z^alpha`` has sup-norm 1
on the polydisc, so ``(1/m) log|z^alpha|`` is an admissible competitor whenever
``z^alpha`` lies in ``I(m Phi)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import ValidationError
from .integrability import multiplier_ideal
from .lattice import MonomialIdeal
from .weights import DiagonalZhouWeight, ToricWeight

MONOMIAL_NOTE = "competitors restricted to monomials z^alpha (sup-norm 1 on the unit polydisc)"


@dataclass(frozen=True, eq=False)
class ApproximantFamily:
    m: int
    weight: DiagonalZhouWeight
    ideal: MonomialIdeal

    @property
    def monomials(self) -> tuple:
        return self.ideal.generators

    @cached_property
    def realized(self) -> ToricWeight:
        """``max_alpha (1/m) log|z^alpha|`` over the generators."""
        return ToricWeight(self.ideal.generators, Fraction(1, self.m))

    @cached_property
    def sigma(self) -> Fraction:
        # the diagonal closed form is a min over pieces, so no reduction is needed
        inv_a = [1 / a for a in self.weight.a]
        den = math.lcm(*(x.denominator for x in inv_a))
        w = np.array([int(x * den) for x in inv_a], dtype=object)
        best = int(np.min(np.array(self.monomials, dtype=object) @ w))
        return Fraction(best, den * self.m)

    def values(self, z_grid):
        return _values(_check_grid(z_grid), self.monomials, Fraction(1, self.m))

    def __call__(self, z) -> float:
        return float(self.values([z])[0])


def _check_phi(Phi: DiagonalZhouWeight):
    if not isinstance(Phi, DiagonalZhouWeight):
        raise ValidationError("a diagonal Zhou weight is required")
    if Phi.scale != 1:
        raise ValidationError("approximation needs a scale-1 diagonal weight")


def approximant(m: int, Phi: DiagonalZhouWeight) -> ApproximantFamily:
    if not isinstance(m, int) or m < 1:
        raise ValidationError(f"m must be a positive integer, got {m!r}")
    _check_phi(Phi)
    ideal = multiplier_ideal(Phi, m)
    return ApproximantFamily(m, Phi, ideal)


def sigma_band(m: int, Phi: DiagonalZhouWeight):
    """Open-closed interval ``(1 - 1/m, 1 + (1 + max a)/m]`` for ``sigma_m``."""
    return 1 - Fraction(1, m), 1 + (1 + max(Phi.a)) / m


def _check_grid(z_grid):
    pts = np.asarray(z_grid, dtype=complex)
    if pts.ndim != 2:
        raise ValidationError("z-grid must be a list of points")
    mods = np.abs(pts)
    if np.any(mods <= 0):
        raise ValidationError("z-grid touches a coordinate axis (values are -inf there)")
    if np.any(mods >= 1):
        raise ValidationError("z-grid must lie in the open unit polydisc")
    return np.log(mods)


def product_grid(lo: float, hi: float, steps: int, n: int):
    axis = np.linspace(lo, hi, steps)
    return [tuple(p) for p in itertools.product(axis, repeat=n)]


def _values(logs, pieces, scale):
    P = np.array([[float(x) for x in p] for p in pieces])
    return float(scale) * np.max(logs @ P.T, axis=1)


@dataclass
class ConvergenceReport:
    m_list: tuple
    sigmas: tuple
    sup_gaps: tuple
    bounds_ok: tuple
    constant: float  # max_m m * sup_gap
    notes: list = field(default_factory=lambda: [MONOMIAL_NOTE])

    @property
    def ok(self) -> bool:
        return all(self.bounds_ok) and math.isfinite(self.constant)

    def rows(self):
        return list(zip(self.m_list, self.sigmas, self.sup_gaps, self.bounds_ok))


def pointwise_convergence(Phi: DiagonalZhouWeight, z_grid, m_list: Sequence[int]) -> ConvergenceReport:
    _check_phi(Phi)
    if Phi.dim != len(z_grid[0]):
        raise ValidationError("grid dimension mismatch")
    logs = _check_grid(z_grid)
    target = _values(logs, Phi.toric.pieces, 1)
    sigmas, gaps, oks = [], [], []
    for m in m_list:
        fam = approximant(m, Phi)
        vals = _values(logs, fam.monomials, Fraction(1, m))
        gap = float(np.max(np.abs(vals - target)))
        s = fam.sigma
        lo, hi = sigma_band(m, Phi)
        sigmas.append(s)
        gaps.append(gap)
        oks.append(lo < s <= hi)
    const = max((m * g for m, g in zip(m_list, gaps)), default=0.0)
    return ConvergenceReport(tuple(m_list), tuple(sigmas), tuple(gaps), tuple(oks), const)


def green_polydisc(z) -> float:
    """Pluricomplex Green function of the unit polydisc with pole at the origin."""
    logs = _check_grid([z])[0]
    return float(np.max(logs))


def green_approximant(m: int, n: int, z) -> float:
    """``max_{|alpha| = m} (1/m) log|z^alpha|`` by enumeration of all exponents."""
    if not isinstance(m, int) or m < 1:
        raise ValidationError("m must be a positive integer")
    if len(z) != n:
        raise ValidationError("point dimension mismatch")
    logs = [float(x) for x in _check_grid([z])[0]]
    best = -math.inf
    for head in itertools.product(range(m + 1), repeat=n - 1):
        rest = m - sum(head)
        if rest < 0:
            continue
        alpha = head + (rest,)
        best = max(best, math.fsum(a * lz for a, lz in zip(alpha, logs)) / m)
    return best


def green_approximant_log(m: int, u) -> Fraction:
    """Exact ``g_m`` at the log-point ``u`` (``u_j = -log|z_j|``), enumerating ``|alpha| = m``."""
    if not isinstance(m, int) or m < 1:
        raise ValidationError("m must be a positive integer")
    u = tuple(Fraction(x) for x in u)
    if any(x <= 0 for x in u):
        raise ValidationError("log coordinates must be positive (point off the axes)")
    n = len(u)
    best = None
    for head in itertools.product(range(m + 1), repeat=n - 1):
        rest = m - sum(head)
        if rest < 0:
            continue
        val = -sum(a * x for a, x in zip(head + (rest,), u)) / m
        best = val if best is None else max(best, val)
    return best


def green_comparison(Phi: DiagonalZhouWeight, u) -> bool:
    """Exact ``Phi >= N G`` at the log-point ``u`` with ``N = max a_j``."""
    u = tuple(Fraction(x) for x in u)
    if any(x < 0 for x in u):
        raise ValidationError("log coordinates must be nonnegative")
    return Phi.log_value(u) >= max(Phi.a) * -min(u)


@dataclass
class EnvelopeReport:
    degrees: tuple
    gaps: tuple  # per degree: max over grid of Phi(z) - sup over candidates
    upper_ok: bool  # no candidate exceeds Phi anywhere
    constant: float
    notes: list = field(default_factory=lambda: [MONOMIAL_NOTE])

    @property
    def ok(self) -> bool:
        return self.upper_ok and math.isfinite(self.constant)


def envelope_identity_check(Phi: DiagonalZhouWeight, z_grid, max_degree: int = 8, tol: float = 1e-12) -> EnvelopeReport:
    """``sup_alpha log|z^alpha| / sigma(log|z^alpha|, Phi)`` against ``Phi(z)`` over degrees."""
    _check_phi(Phi)
    logs = _check_grid(z_grid)
    target = _values(logs, Phi.toric.pieces, 1)
    inv_a = [1 / a for a in Phi.a]
    n = Phi.dim
    best = np.full(len(logs), -np.inf)
    gaps, upper_ok = [], True
    for d in range(1, max_degree + 1):
        for alpha in itertools.product(range(d + 1), repeat=n):
            if sum(alpha) != d:
                continue
            sigma = sum(x * y for x, y in zip(alpha, inv_a))
            vals = logs @ np.array(alpha, dtype=float) / float(sigma)
            if np.any(vals > target + tol):
                upper_ok = False
            best = np.maximum(best, vals)
        gaps.append(float(np.max(target - best)))
    const = max((d * g for d, g in zip(range(1, max_degree + 1), gaps)), default=0.0)
    return EnvelopeReport(tuple(range(1, max_degree + 1)), tuple(gaps), upper_ok, const)
