"""Tian functions ``Tn(t)`` as exact concave piecewise-linear functions.

For toric data the exponent of the integrand is linear in ``t`` at every fixed
point ``u``, and the feasible set ``{depth(weight) >= 1}`` does not move with
``t``.  Hence ``Tn`` is a lower envelope of finitely many lines; each threshold
solve returns one supporting line, and breakpoints are located exactly by
intersecting supporting lines (Eisner-Severance style bisection).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import engine
from .errors import DomainError, PreconditionError, ValidationError
from .integrability import JumpingQuery, is_integrable, jumping_number
from .lattice import as_rational, dot, format_rational
from .weights import (
    DiagonalZhouWeight,
    ReferencePair,
    ToricWeight,
    lelong_number,
    weight_max,
)


@dataclass(frozen=True)
class TianFunctionPL:
    knots: tuple  # t_lo, interior breakpoints..., t_hi
    values: tuple  # Tn at each knot

    @property
    def domain(self) -> tuple:
        return self.knots[0], self.knots[-1]

    @property
    def breakpoints(self) -> tuple:
        return self.knots[1:-1]

    @property
    def slopes(self) -> tuple:
        return tuple(
            (v1 - v0) / (t1 - t0)
            for t0, t1, v0, v1 in zip(self.knots, self.knots[1:], self.values, self.values[1:])
        )

    @property
    def value_at_0(self) -> Fraction:
        return self(0)

    def __call__(self, t) -> Fraction:
        t = as_rational(t)
        lo, hi = self.domain
        if not lo <= t <= hi:
            raise ValidationError(f"t={t} outside [{lo}, {hi}]")
        for t0, t1, v0, v1 in zip(self.knots, self.knots[1:], self.values, self.values[1:]):
            if t0 <= t <= t1:
                return v0 + (v1 - v0) * (t - t0) / (t1 - t0)
        return self.values[0]  # single-point domain

    def is_concave(self) -> bool:
        s = self.slopes
        return all(a >= b for a, b in zip(s, s[1:]))

    def slope_at(self, t, side: str) -> Fraction:
        t = as_rational(t)
        lo, hi = self.domain
        if side == "left":
            if not lo < t <= hi:
                raise ValidationError(f"no left neighbourhood of {t} in [{lo}, {hi}]")
            idx = max(i for i, k in enumerate(self.knots[:-1]) if k < t)
        elif side == "right":
            if not lo <= t < hi:
                raise ValidationError(f"no right neighbourhood of {t} in [{lo}, {hi}]")
            idx = max(i for i, k in enumerate(self.knots[:-1]) if k <= t)
        else:
            raise ValidationError("side must be 'left' or 'right'")
        return self.slopes[idx]

    def rows(self):
        """(t, Tn(t), slope to the right) per knot; the last slope is the left one."""
        s = self.slopes
        out = []
        for i, (t, v) in enumerate(zip(self.knots, self.values)):
            out.append((t, v, s[min(i, len(s) - 1)] if s else Fraction(0)))
        return out


class _TianProblem:
    def __init__(self, weight, f=None, psi=None, ref: ReferencePair | None = None):
        self.weight = weight.toric if isinstance(weight, DiagonalZhouWeight) else weight
        n = self.weight.dim
        self.dim = n
        self.f = tuple(Fraction(x) for x in f) if f is not None else None
        self.psi = psi
        self.ref = ref or ReferencePair.trivial(n)
        if (self.f is not None and len(self.f) != n) or (psi is not None and psi.dim != n):
            raise ValidationError("dimension mismatch in Tian function data")
        if self.ref.dim != n:
            raise ValidationError("reference dimension mismatch")

    def integrands(self, t):
        factors = ((t, self.psi),) if self.psi is not None else ()
        powers = ((t, self.f),) if self.f is not None else ()
        return [
            engine.build_integrand(
                self.dim, g, twists=(self.ref.phi0,), factors=factors, monomial_powers=powers
            )
            for g in self.ref.f0.generators
        ]

    def slope_at_point(self, u) -> Fraction:
        s = Fraction(0)
        if self.f is not None:
            s += dot(self.f, u)
        if self.psi is not None:
            s += self.psi.depth(u)
        return s

    def integrable(self, t) -> bool:
        return all(engine.is_positive(i) for i in self.integrands(t))

    def line(self, t):
        """(Tn(t), intercept, slope) of a supporting line tight at ``t``."""
        best = None
        for integ in self.integrands(t):
            try:
                val, u = engine.threshold(integ, self.weight)
            except DomainError as exc:
                raise DomainError(f"reference is not integrable at t={format_rational(t)}") from exc
            if best is None or val < best[0]:
                slope = self.slope_at_point(u)
                best = (val, val - slope * t, slope)
        return best


def _envelope(prob: _TianProblem, lo: Fraction, hi: Fraction):
    left, right = prob.line(lo), prob.line(hi)
    knots = {lo: left[0], hi: right[0]}
    stack = [(lo, hi, left, right)]
    while stack:
        a, b, la, lb = stack.pop()
        if la[2] == lb[2]:
            continue  # parallel supporting lines tight at both ends: linear
        t_star = (lb[1] - la[1]) / (la[2] - lb[2])
        if t_star <= a or t_star >= b:
            continue
        lm = prob.line(t_star)
        line_val = la[1] + la[2] * t_star
        knots[t_star] = lm[0]
        if lm[0] == line_val:
            continue
        stack.append((a, t_star, la, lm))
        stack.append((t_star, b, lm, lb))
    ts = sorted(knots)
    vals = [knots[t] for t in ts]
    # drop knots where the slope does not change
    keep_t, keep_v = [ts[0]], [vals[0]]
    for i in range(1, len(ts) - 1):
        s_in = (vals[i] - keep_v[-1]) / (ts[i] - keep_t[-1])
        s_out = (vals[i + 1] - vals[i]) / (ts[i + 1] - ts[i])
        if s_in != s_out:
            keep_t.append(ts[i])
            keep_v.append(vals[i])
    if len(ts) > 1:
        keep_t.append(ts[-1])
        keep_v.append(vals[-1])
    return TianFunctionPL(tuple(keep_t), tuple(keep_v))


def tian_function(
    weight,
    f: Sequence | None = None,
    psi: ToricWeight | None = None,
    ref: ReferencePair | None = None,
    t_range=(-1, 4),
) -> TianFunctionPL:
    """``Tn(t) = sup{c : |f0|^2 e^{-2 phi0} |z^f|^{2t} e^{2 t psi} e^{-2 c weight} integrable}``.

    ``ref`` carries ``f0`` and ``phi0`` (trivial by default).
    """
    lo, hi = (as_rational(x) for x in t_range)
    if lo > hi:
        raise ValidationError("empty t-range")
    prob = _TianProblem(weight, f, psi, ref)
    for t in (lo, hi):
        if not prob.integrable(t):
            raise DomainError(f"reference is not integrable at t={format_rational(t)}")
    return _envelope(prob, lo, hi)


def derivative_at_zero(T: TianFunctionPL, side: str = "right") -> Fraction:
    lo, hi = T.domain
    if not lo < 0 < hi:
        raise ValidationError("0 must be interior to the Tian function's domain")
    return T.slope_at(0, side)


# ---------------------------------------------------------------------------
# The b0 threshold for max{u, v/b}


@dataclass
class ThresholdReport:
    b0: Fraction
    left_derivative: Fraction
    right_derivative: Fraction
    tn0: Fraction
    table: list  # (b, threshold of ref for max{u, v/b}, non-integrable at c = Tn(0))
    epsilon: Fraction

    @property
    def ok(self) -> bool:
        at, above = self.table[0], self.table[-1]
        return at[1] == self.tn0 and at[2] and above[1] > self.tn0 and not above[2]


def _local_tian(weight, psi, ref):
    prob = _TianProblem(weight, psi=psi, ref=ref)
    lo = Fraction(-1)
    for _ in range(60):
        if prob.integrable(lo):
            break
        lo /= 2
    else:  # pragma: no cover
        raise DomainError("no left neighbourhood of 0 with integrable reference")
    hi = Fraction(1)
    return _envelope(prob, lo, hi)


def threshold_b0(u: ToricWeight, v: ToricWeight, ref: ReferencePair | None = None,
                 epsilon=Fraction(1, 1000)) -> ThresholdReport:
    """``b0`` = left derivative at 0 of ``A(t) = sup{c : ref e^{2(t v - c u)} integrable}``.

    The report checks that the threshold of ``ref`` for ``max{u, v/b}`` keeps the
    value ``A(0)`` at ``b = b0`` and strictly exceeds it at ``b0 + epsilon``.
    """
    u = u.toric if isinstance(u, DiagonalZhouWeight) else u
    v = v.toric if isinstance(v, DiagonalZhouWeight) else v
    ref = ref or ReferencePair.trivial(u.dim)
    if lelong_number(v) <= 0:
        raise PreconditionError("v has zero Lelong number; A(t) is not strictly increasing")
    T = _local_tian(u, v, ref)
    left = T.slope_at(0, "left")
    right = T.slope_at(0, "right")
    if left <= 0 or right <= 0:
        flat = "left" if left <= 0 else "right"
        raise PreconditionError(f"A(t) is flat on the {flat} of t=0 (slope 0)")
    b0 = left
    tn0 = T(0)
    table = []
    for b in (b0, b0 + epsilon):
        q = JumpingQuery(weight_max(u, v.scaled(1 / b)), ref.f0, ref.phi0)
        table.append((b, jumping_number(q), not is_integrable(q, tn0)))
    return ThresholdReport(b0, left, right, tn0, table, epsilon)
