"""Jumping numbers, multiplier ideals and the valuative criteria built on them.

Integrability follows the strict monomial criterion: ``|z^g|^2 e^{-2 c phi}`` is
integrable iff ``c`` is strictly below the threshold, never at it.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import engine
from .errors import CapacityError, DomainError, ValidationError
from .lattice import (
    LinearProgram,
    MonomialIdeal,
    as_rational,
    lp_solve,
    polyhedron_vertices,
)
from .weights import (
    DiagonalZhouWeight,
    ReferencePair,
    ToricWeight,
    normalize_direction,
    relative_type,
    zhou_weight_for,
)

MAX_ENUMERATION = 2_000_000
MAX_INCLUSION_BOX = 50_000_000


def _as_toric(w) -> ToricWeight:
    return w.toric if isinstance(w, DiagonalZhouWeight) else w


def _as_ideal(numerator, dim) -> MonomialIdeal:
    if numerator is None:
        return MonomialIdeal.unit(dim)
    if isinstance(numerator, MonomialIdeal):
        return numerator
    return MonomialIdeal(dim, (tuple(numerator),))


@dataclass(frozen=True)
class JumpingQuery:
    """``|numerator|^2 e^{-2 twist} e^{-2 c weight}`` as a function of ``c``."""

    weight: object
    numerator: object = None
    twist: ToricWeight | None = None

    def __post_init__(self):
        w = _as_toric(self.weight)
        object.__setattr__(self, "weight", w)
        object.__setattr__(self, "numerator", _as_ideal(self.numerator, w.dim))
        if self.numerator.dim != w.dim or (self.twist is not None and self.twist.dim != w.dim):
            raise ValidationError("all parts of a jumping query must share one dimension")
        if w.is_zero:
            raise ValidationError("weight is bounded near o")

    @property
    def dim(self) -> int:
        return self.weight.dim

    def integrands(self):
        twists = (self.twist,) if self.twist is not None else ()
        return [
            engine.build_integrand(self.dim, g, twists=twists) for g in self.numerator.generators
        ]


def is_integrable(q: JumpingQuery, c) -> bool:
    """Decide integrability at ``c`` directly from the sign of ``A - c D``."""
    c = as_rational(c)
    return all(engine.is_positive(i.minus_weight(c, q.weight)) for i in q.integrands())


def jumping_number(q: JumpingQuery) -> Fraction:
    """Exact threshold: integrable iff ``c`` is strictly below the returned value."""
    vals = [engine.threshold(i, q.weight)[0] for i in q.integrands()]
    return min(vals)


def jumping_number_with_point(q: JumpingQuery):
    best = None
    for i in q.integrands():
        val, u = engine.threshold(i, q.weight)
        if best is None or val < best[0]:
            best = (val, u)
    return best


def lct(weight) -> Fraction:
    return jumping_number(JumpingQuery(weight))


def zhou_valuation(g: Sequence, phi: DiagonalZhouWeight) -> Fraction:
    """``nu(z^g, Phi) = sigma(log|z^g|, Phi)``."""
    g = tuple(g)
    if len(g) != phi.dim:
        raise ValidationError("exponent and weight dimensions differ")
    if any(Fraction(x).denominator != 1 or x < 0 for x in g):
        raise ValidationError(f"valuation needs a nonnegative integer exponent: {g}")
    return relative_type(ToricWeight.monomial(g), phi)


def multiplier_membership(g: Sequence, phi, t) -> bool:
    """``z^g in I(t phi)_o`` iff the jumping number of ``z^g`` for ``t phi`` exceeds 1."""
    t = as_rational(t)
    if t < 0:
        raise ValidationError("multiplier ideal parameter must be nonnegative")
    if t == 0:
        return True
    return jumping_number(JumpingQuery(_as_toric(phi), tuple(g))) > t


class _VertexOracle:
    """``c(g) = min_i <g + 1, x_i>`` over the vertices of ``{depth >= 1}``."""

    def __init__(self, weight: ToricWeight):
        self.weight = weight
        rows = [(tuple(weight.scale * b for b in beta), Fraction(1)) for beta in weight.pieces]
        self.vertices = polyhedron_vertices(rows, weight.dim)

    def threshold(self, g) -> Fraction:
        return min(sum((x + 1) * v for x, v in zip(g, vert)) for vert in self.vertices)

    def axis_bounds(self, t) -> list:
        n = self.weight.dim
        bounds = []
        for j in range(n):
            pos = [vert[j] for vert in self.vertices if vert[j] > 0]
            bounds.append(max((math.floor(t / p) + 1 for p in pos), default=0))
        return bounds

    def min_last(self, head, t):
        """Smallest last coordinate putting ``head + (m,)`` into ``I(t phi)``, or None."""
        need = 0
        for vert in self.vertices:
            rest = t - sum((x + 1) * v for x, v in zip(head, vert))
            xl = vert[-1]
            if xl == 0:
                if rest >= 0:
                    return None
                continue
            m = math.floor(rest / xl - 1) + 1
            need = max(need, m)
        return need


def multiplier_ideal(phi, t) -> MonomialIdeal:
    """Minimal monomial generators of ``I(t phi)_o`` by staircase enumeration.

    Per-axis bounds come from the vertices of ``{depth >= 1}``: a generator with
    ``g_j > 0`` must fail membership after lowering ``g_j``, which caps ``g_j``.
    """
    w = _as_toric(phi)
    t = as_rational(t)
    if t < 0:
        raise ValidationError("multiplier ideal parameter must be nonnegative")
    if w.is_zero:
        raise ValidationError("weight is bounded near o")
    n = w.dim
    if t == 0:
        return MonomialIdeal.unit(n)
    oracle = _VertexOracle(w)
    bounds = oracle.axis_bounds(t)
    head_bounds = bounds[:-1]
    size = math.prod(b + 1 for b in head_bounds)
    if size > MAX_ENUMERATION:
        axis = max(range(n - 1), key=lambda j: head_bounds[j])
        raise CapacityError(
            f"lattice enumeration box of {size} points exceeds {MAX_ENUMERATION}"
            f" (axis {axis} bound {head_bounds[axis]})",
            axis=axis,
        )
    last = _staircase_last(oracle, head_bounds, t)
    return MonomialIdeal._trusted(n, _staircase_minimal(last))


def _staircase_last(oracle: _VertexOracle, head_bounds, t):
    """Array over the head box of the smallest admissible last exponent (-1: none)."""
    shape = tuple(b + 1 for b in head_bounds)
    heads = np.indices(shape).reshape(len(shape), -1).T if shape else np.zeros((1, 0), dtype=np.int64)
    need = np.zeros(len(heads), dtype=object)
    never = np.zeros(len(heads), dtype=bool)
    for vert in oracle.vertices:
        den = math.lcm(t.denominator, *(x.denominator for x in vert))
        w = [int(x * den) for x in vert]
        rest = int(t * den) - (heads + 1).astype(object) @ np.array(w[:-1], dtype=object) if shape else np.full(1, int(t * den), dtype=object)
        if w[-1] == 0:
            never |= rest >= 0
        else:
            need = np.maximum(need, rest // w[-1])
    out = need.astype(np.int64)
    out[never] = -1
    return out.reshape(shape)


def _staircase_minimal(last) -> tuple:
    """Minimal points of ``{head + (last[head],)}``.

    ``last`` is nonincreasing in ``head``, so a point is dominated exactly when
    lowering some head coordinate keeps an admissible last coordinate as small.
    """
    ok = last >= 0
    for j in range(last.ndim):
        lower = np.take(last, range(last.shape[j] - 1), axis=j)
        upper = [slice(None)] * last.ndim
        upper[j] = slice(1, None)
        upper = tuple(upper)
        dominated = (lower >= 0) & (lower <= last[upper])
        ok[upper] &= ~dominated
    idx = np.argwhere(ok)
    pts = [tuple(int(x) for x in h) + (int(last[tuple(h)]),) for h in idx]
    if not pts:  # pragma: no cover - large powers always enter the ideal
        raise DomainError("multiplier ideal appears empty")
    return tuple(sorted(pts))


def soc_witness(g, phi, t):
    """A rational ``p > 1`` with ``z^g in I(p t phi)`` (openness), or None."""
    t = as_rational(t)
    c = jumping_number(JumpingQuery(_as_toric(phi), tuple(g)))
    if c <= t:
        return None
    p = (c / t + 1) / 2 if t > 0 else Fraction(2)
    return p if multiplier_membership(g, phi, p * t) else None


# ---------------------------------------------------------------------------
# Sup over Zhou weights versus the jumping number of an ideal


@dataclass
class ThmAReport:
    lhs: Fraction
    a_star: tuple | None
    sigma_at_a_star: Fraction | None
    product: Fraction | None
    exact_equality: bool
    grid_max: Fraction
    grid_points: int
    grid_exceeds: bool
    gap_flag: bool
    notes: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return (self.exact_equality or self.gap_flag) and not self.grid_exceeds


def _diagonal_exponents(w: ToricWeight):
    """``b`` when ``w`` is ``scale * log max |z_j|^{b_j}``, else None."""
    n = w.dim
    if len(w.pieces) != n:
        return None
    b = [None] * n
    for p in w.pieces:
        nz = [j for j, c in enumerate(p) if c != 0]
        if len(nz) != 1:
            return None
        b[nz[0]] = p[nz[0]] * w.scale
    return None if any(x is None for x in b) else tuple(b)


def simplex_grid(n: int, steps: int):
    """Interior points ``x = k/steps`` with ``sum x = 1`` and all ``k >= 1``."""
    for head in itertools.product(range(1, steps), repeat=n - 1):
        last = steps - sum(head)
        if last >= 1:
            yield tuple(Fraction(k, steps) for k in head + (last,))


def _grid_ratio_max(w: ToricWeight, I: MonomialIdeal, steps: int, bound: Fraction):
    """Exact ``max_k depth_w(k) / min_g <g+1, k>`` over the interior simplex grid."""
    ks = np.array(list(_simplex_ints(I.dim, steps)), dtype=np.int64)
    if len(ks) == 0:
        return Fraction(0), 0, False
    den = math.lcm(*(c.denominator for p in w.pieces for c in p))
    P = np.array([[int(c * den) for c in p] for p in w.pieces], dtype=np.int64)
    G = np.array([[g + 1 for g in gen] for gen in I.generators], dtype=np.int64)
    num = (ks @ P.T).min(axis=1)
    dn = (ks @ G.T).min(axis=1)
    # val = w.scale / den * num / dn; pick the exact max among float near-ties
    approx = num / dn
    top = np.flatnonzero(approx >= approx.max() * (1 - 1e-9))
    best = max(Fraction(int(num[i]), int(dn[i])) for i in top) * w.scale / den
    return best, len(ks), best > bound


def _simplex_ints(n: int, steps: int):
    for head in itertools.product(range(1, steps), repeat=n - 1):
        last = steps - sum(head)
        if last >= 1:
            yield head + (last,)


def thmA_check(I: MonomialIdeal, phi, resolution=Fraction(1, 100)) -> ThmAReport:
    """Compare ``c_o^I(phi)`` with ``1 / sup_a sigma(phi, Zhou weight for |I|^2 along a)``."""
    w = _as_toric(phi)
    if I.dim != w.dim:
        raise ValidationError("ideal and weight dimensions differ")
    lhs, u_star = jumping_number_with_point(JumpingQuery(w, I))
    ref = ReferencePair(I, ToricWeight.zero(I.dim))
    notes = []
    b = _diagonal_exponents(w)
    if b is not None:
        a_star = normalize_direction(b)
    elif all(x > 0 for x in u_star):
        a_star = normalize_direction(tuple(1 / x for x in u_star))
    else:
        a_star = None
        notes.append("optimal direction touches the orthant boundary; sup not attained")
    sigma_star = product = None
    exact = False
    if a_star is not None:
        zw = zhou_weight_for(ref, a_star)
        sigma_star = relative_type(w, zw)
        product = lhs * sigma_star
        exact = product == 1
    steps = int(round(1 / as_rational(resolution)))
    # along x = 1/a the Zhou weight is s(x) Phi_a with s(x) = min_g <g+1, x>;
    # on the grid x = k/steps both sides are integer forms in k
    grid_max, count, exceeds = _grid_ratio_max(w, I, steps, 1 / lhs)
    return ThmAReport(
        lhs, a_star, sigma_star, product, exact, grid_max, count, exceeds, a_star is None, notes
    )


# ---------------------------------------------------------------------------
# Multiplier-ideal inclusions versus Zhou-number comparison


@dataclass
class InclusionVerdict:
    sigma_le: bool  # sigma(u, Phi) <= sigma(v, Phi) for every diagonal Zhou weight
    ideals_included: bool  # I(t v) subset I(t u) on the whole t-grid
    sigma_witness: tuple | None = None  # direction a with sigma(u) > sigma(v)
    ideal_witness: tuple | None = None  # (t, g) with z^g in I(tv) but not I(tu)
    t_values: int = 0

    @property
    def agree(self) -> bool:
        return self.sigma_le == self.ideals_included


def _simplex_rows(n):
    return [((Fraction(1),) * n, Fraction(1)), ((Fraction(-1),) * n, Fraction(-1))]


def sigma_dominance(u: ToricWeight, v: ToricWeight):
    """Decide ``sigma(u, Phi_a) <= sigma(v, Phi_a)`` for all ``a`` exactly.

    With ``x = 1/a`` on the simplex, ``sigma(w, Phi_a) = depth_w(x)``; the claim is
    ``min_x (<beta, x> - depth_u(x)) >= 0`` for every folded piece ``beta`` of v.
    Returns ``(True, None)`` or ``(False, a)`` with a finite violating direction.
    """
    n = u.dim
    for beta in v.folded:
        integ = engine.Integrand(n, beta, ((u.scale, u.pieces),), ())
        status, val, x = engine._minimize(integ, _simplex_rows(n))
        if val < 0:
            return False, _interior_direction(x, lambda y: v.depth(y) < u.depth(y))
    return True, None


def _interior_direction(x, violated):
    """Pull a simplex point inside so that ``a = 1/x`` is finite, keeping the violation."""
    n = len(x)
    eps = Fraction(1, 2)
    for _ in range(200):
        y = tuple((1 - eps) * xi + eps / n for xi in x)
        if violated(y):
            return tuple(1 / yi for yi in y)
        eps /= 2
    raise AssertionError("no interior witness found")  # pragma: no cover


def inclusion_equivalence(u: ToricWeight, v: ToricWeight, t_max=20, grid_denominator=4):
    """Check sigma-dominance against ``I(tv) subset I(tu)`` for every ``0 < t <= t_max``.

    Inclusion fails at some t iff a generator h of ``I(tv)`` has
    ``c_u(h) <= t < c_v(h)``; then h also fails at ``t' = c_u(h)``, and it lies
    in the generator box of v at ``t_max``.  One exact pass over that box
    therefore settles all t at once.  ``t_values`` counts the grid
    ``k / grid_denominator`` together with the jumping values of u met in the box.
    """
    u, v = _as_toric(u), _as_toric(v)
    if u.dim != v.dim:
        raise ValidationError("dimension mismatch")
    t_max = as_rational(t_max)
    if t_max <= 0:
        raise ValidationError("t_max must be positive")
    sig, a_wit = sigma_dominance(u, v)

    ou, ov = _VertexOracle(u), _VertexOracle(v)
    shape = tuple(b + 1 for b in ov.axis_bounds(t_max))
    size = math.prod(shape)
    if size > MAX_INCLUSION_BOX:
        axis = max(range(len(shape)), key=lambda j: shape[j])
        raise CapacityError(f"inclusion box of {size} points exceeds {MAX_INCLUSION_BOX}", axis=axis)
    den = math.lcm(t_max.denominator, *(x.denominator for o in (ou, ov) for vert in o.vertices for x in vert))
    Vu, Vv = (np.array([[int(x * den) for x in vert] for vert in o.vertices], dtype=np.int64).T for o in (ou, ov))
    tm = int(t_max * den)
    rest = np.indices(shape[1:]).reshape(len(shape) - 1, -1).T + 1 if len(shape) > 1 else np.zeros((1, 0), dtype=np.int64)
    included, i_wit, jump_set = True, None, set()
    for g0 in range(shape[0]):  # one slab of the box at a time
        pts = np.hstack([np.full((len(rest), 1), g0 + 1), rest])
        cu, cv = (pts @ Vu).min(axis=1), (pts @ Vv).min(axis=1)
        jump_set.update(np.unique(cu[cu <= tm]).tolist())
        bad = np.flatnonzero((cu <= tm) & (cu < cv))
        if len(bad):
            k = bad[np.argmin(cu[bad])]
            cand = (Fraction(int(cu[k]), den), tuple(int(x) - 1 for x in pts[k]))
            if i_wit is None or cand[0] < i_wit[0]:
                included, i_wit = False, cand
    jumps = {Fraction(c, den) for c in jump_set}
    grid = {Fraction(k, grid_denominator) for k in range(1, int(t_max * grid_denominator) + 1)}
    return InclusionVerdict(sig, included, a_wit, i_wit, len(jumps | grid))


# ---------------------------------------------------------------------------
# Division and integral closure


@dataclass
class DivisionVerdict:
    componentwise: bool
    valuative: bool
    witness: tuple | None = None  # direction a with nu(f) < nu(g)

    @property
    def agree(self) -> bool:
        return self.componentwise == self.valuative


def divides(f: Sequence, g: Sequence) -> DivisionVerdict:
    """Does ``z^g`` divide ``z^f``?  Componentwise and by Zhou valuations.

    The valuative side minimizes ``nu(f) - nu(g) = <f - g, x>`` over directions
    ``x = 1/a`` in the closed simplex by an exact LP; a negative minimum is
    turned into an interior direction where the valuations are compared.
    """
    f, g = tuple(int(x) for x in f), tuple(int(x) for x in g)
    if len(f) != len(g):
        raise ValidationError("dimension mismatch")
    if any(x < 0 for x in f + g):
        raise ValidationError("exponents must be nonnegative")
    n = len(f)
    comp = all(x >= y for x, y in zip(f, g))
    diff = tuple(Fraction(x - y) for x, y in zip(f, g))
    res = lp_solve(LinearProgram(diff, tuple(_simplex_rows(n))))
    witness = None
    if res.value >= 0:
        valuative = True
    else:
        j = max(range(n), key=lambda k: res.x[k])  # the LP optimum sits at a simplex vertex
        if n == 1:
            witness = (Fraction(1),)
        else:
            big = max(abs(d) for d in diff)
            eps = Fraction(1, 2 * int(1 + big) * n)
            x = tuple(1 - eps if k == j else eps / (n - 1) for k in range(n))
            witness = tuple(1 / xi for xi in x)
        phi = DiagonalZhouWeight(witness)
        valuative = zhou_valuation(f, phi) >= zhou_valuation(g, phi)
    return DivisionVerdict(comp, valuative, witness)


def integral_closure_contains(I: MonomialIdeal, f: Sequence):
    """``z^f`` in the integral closure of I, by Newton polyhedron and by valuations.

    Returns ``(newton, valuative)``; the valuative side minimizes
    ``<f, x> - min_g <g, x>`` over the simplex exactly.
    """
    newton = I.integral_closure_contains(tuple(f))
    n = I.dim
    integ = engine.Integrand(n, tuple(Fraction(c) for c in f), ((Fraction(1), I.generators),), ())
    _, val, _ = engine._minimize(integ, _simplex_rows(n))
    return newton, val >= 0
