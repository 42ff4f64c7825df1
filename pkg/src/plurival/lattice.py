"""Exact rational building blocks: exponent vectors, monomial ideals, Newton
polyhedra, and a small two-phase simplex solver over ``fractions.Fraction``.

Everything here is exact; floats never enter a decision.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

from .errors import CapacityError, ValidationError

MAX_LP_DIM = 16

Exponent = tuple  # tuple[Fraction, ...]


def as_rational(x) -> Fraction:
    """Convert int, Fraction, ``"p/q"`` string or float (by its repr) to Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise ValidationError(f"not a rational: {x!r}")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(repr(x))
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"not a rational: {x!r}") from exc
    raise ValidationError(f"not a rational: {x!r}")


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def exponent(coords: Iterable, dim: int | None = None) -> Exponent:
    """Validated exponent vector (nonnegative rationals)."""
    vec = tuple(as_rational(c) for c in coords)
    if not vec:
        raise ValidationError("exponent must have dimension >= 1")
    if dim is not None and len(vec) != dim:
        raise ValidationError(f"dimension mismatch: expected {dim}, got {len(vec)}")
    if any(c < 0 for c in vec):
        raise ValidationError(f"exponent coordinates must be nonnegative: {vec}")
    return vec


def dot(a: Sequence, b: Sequence) -> Fraction:
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def dominates(a: Sequence, b: Sequence) -> bool:
    """True when ``a >= b`` componentwise."""
    return all(x >= y for x, y in zip(a, b))


def minimal_elements(points: Iterable[Sequence]) -> tuple:
    """Componentwise-minimal points, sorted for a canonical order."""
    pts = sorted(set(tuple(p) for p in points))
    keep = [p for p in pts if not any(q != p and dominates(p, q) for q in pts)]
    return tuple(keep)


# ---------------------------------------------------------------------------
# Small dense linear algebra over Q


def solve_linear(matrix: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]):
    """Solve a square system exactly; returns None when singular."""
    n = len(matrix)
    aug = [list(map(Fraction, row)) + [Fraction(b)] for row, b in zip(matrix, rhs)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if piv is None:
            return None
        aug[col], aug[piv] = aug[piv], aug[col]
        p = aug[col][col]
        aug[col] = [v / p for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [v - f * w for v, w in zip(aug[r], aug[col])]
    return tuple(aug[r][n] for r in range(n))


def nullspace(rows: Sequence[Sequence[Fraction]], ncols: int) -> list[tuple]:
    """Basis of the right nullspace of ``rows`` (reduced row echelon form)."""
    mat = [list(map(Fraction, r)) for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(mat)) if mat[i][c] != 0), None)
        if piv is None:
            continue
        mat[r], mat[piv] = mat[piv], mat[r]
        p = mat[r][c]
        mat[r] = [v / p for v in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][c] != 0:
                f = mat[i][c]
                mat[i] = [v - f * w for v, w in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
        if r == len(mat):
            break
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        vec = [Fraction(0)] * ncols
        vec[fc] = Fraction(1)
        for i, pc in enumerate(pivots):
            vec[pc] = -mat[i][fc]
        basis.append(tuple(vec))
    return basis


def polyhedron_vertices(rows: Sequence[tuple[Sequence, Fraction]], dim: int) -> list[tuple]:
    """Vertices of ``{x >= 0 : <row, x> >= bound}`` by brute-force enumeration.

    Exponential in ``dim``; intended for n <= 4 and as an oracle for ``lp_solve``.
    """
    cons = [(tuple(map(Fraction, r)), Fraction(b)) for r, b in rows]
    cons += [(tuple(Fraction(int(i == j)) for i in range(dim)), Fraction(0)) for j in range(dim)]
    found = set()
    for subset in itertools.combinations(range(len(cons)), dim):
        sol = solve_linear([cons[i][0] for i in subset], [cons[i][1] for i in subset])
        if sol is None:
            continue
        if all(dot(r, sol) >= b for r, b in cons):
            found.add(sol)
    return sorted(found)


# ---------------------------------------------------------------------------
# Linear programming


@dataclass(frozen=True)
class LinearProgram:
    """``min`` (or ``max``) of ``objective . x`` subject to ``row . x >= bound``
    for every constraint and ``x >= 0``."""

    objective: tuple
    constraints: tuple = ()
    sense: str = "min"

    def __post_init__(self):
        obj = tuple(as_rational(c) for c in self.objective)
        if not obj:
            raise ValidationError("LP needs at least one variable")
        cons = []
        for row, bound in self.constraints:
            row = tuple(as_rational(c) for c in row)
            if len(row) != len(obj):
                raise ValidationError(
                    f"constraint has {len(row)} coefficients, objective has {len(obj)}"
                )
            cons.append((row, as_rational(bound)))
        if self.sense not in ("min", "max"):
            raise ValidationError(f"sense must be 'min' or 'max', got {self.sense!r}")
        object.__setattr__(self, "objective", obj)
        object.__setattr__(self, "constraints", tuple(cons))

    @property
    def dim(self) -> int:
        return len(self.objective)

    def dual(self) -> "LinearProgram":
        """The LP dual: ``min c.x, Ax >= b`` becomes ``max b.y, -A^T y >= -c``."""
        if self.sense != "min":
            raise ValidationError("dual() is defined for minimization programs")
        m = len(self.constraints)
        cols = [
            (tuple(-self.constraints[i][0][j] for i in range(m)), -self.objective[j])
            for j in range(self.dim)
        ]
        return LinearProgram(tuple(b for _, b in self.constraints), tuple(cols), "max")


@dataclass(frozen=True)
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    value: Fraction | None = None
    x: tuple | None = None
    dual: tuple | None = None
    certificate: tuple | None = None  # improving ray, or Farkas multipliers


class _Tableau:
    def __init__(self, rows, rhs, basis):
        self.rows = rows
        self.rhs = rhs
        self.basis = basis

    def pivot(self, r, c):
        rows, rhs = self.rows, self.rhs
        p = rows[r][c]
        rows[r] = [v / p if v else v for v in rows[r]]
        rhs[r] /= p
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [v - f * w if w else v for v, w in zip(rows[i], rows[r])]
                rhs[i] -= f * rhs[r]
        self.basis[r] = c

    def reduced_costs(self, cost):
        red = list(cost)
        val = Fraction(0)
        for i, b in enumerate(self.basis):
            cb = cost[b]
            if cb:
                row = self.rows[i]
                red = [d - cb * v if v else d for d, v in zip(red, row)]
                val += cb * self.rhs[i]
        return red, val

    def run(self, cost, allowed):
        """Bland's rule simplex; returns ("optimal", None) or ("unbounded", column)."""
        while True:
            red, _ = self.reduced_costs(cost)
            enter = next((j for j in allowed if red[j] < 0), None)
            if enter is None:
                return "optimal", None
            best = None
            for i, row in enumerate(self.rows):
                if row[enter] > 0:
                    ratio = self.rhs[i] / row[enter]
                    key = (ratio, self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return "unbounded", enter
            self.pivot(best[1], enter)


def lp_solve(p: LinearProgram, _check_capacity: bool = True) -> LPResult:
    """Exact two-phase simplex with Bland's anti-cycling rule."""
    if _check_capacity and p.dim > MAX_LP_DIM:
        raise CapacityError(f"LP has {p.dim} variables; desk-scale limit is {MAX_LP_DIM}")
    if p.sense == "max":
        flipped = LinearProgram(tuple(-c for c in p.objective), p.constraints, "min")
        res = lp_solve(flipped, _check_capacity)
        if res.status != "optimal":
            return res
        return LPResult("optimal", -res.value, res.x, tuple(-y for y in res.dual), None)

    n, m = p.dim, len(p.constraints)
    n_art = sum(1 for _, b in p.constraints if b > 0)
    ncols = n + m + n_art
    rows, rhs, basis = [], [], []
    art = n + m
    for i, (a, b) in enumerate(p.constraints):
        row = [Fraction(0)] * ncols
        if b > 0:
            row[:n] = a
            row[n + i] = Fraction(-1)
            row[art] = Fraction(1)
            basis.append(art)
            art += 1
            rhs.append(b)
        else:
            row[:n] = [-v for v in a]
            row[n + i] = Fraction(1)
            basis.append(n + i)
            rhs.append(-b)
        rows.append(row)
    tab = _Tableau(rows, rhs, basis)

    if n_art:
        cost1 = [Fraction(0)] * (n + m) + [Fraction(1)] * n_art
        tab.run(cost1, range(ncols))
        _, val = tab.reduced_costs(cost1)
        if val > 0:
            return LPResult("infeasible", certificate=_farkas(p))
        # drive remaining (zero-level) artificials out of the basis
        i = 0
        while i < len(tab.rows):
            if tab.basis[i] >= n + m:
                col = next((j for j in range(n + m) if tab.rows[i][j] != 0), None)
                if col is None:
                    del tab.rows[i], tab.rhs[i], tab.basis[i]
                    continue
                tab.pivot(i, col)
            i += 1
        tab.rows = [r[: n + m] for r in tab.rows]

    cost = list(p.objective) + [Fraction(0)] * m
    status, col = tab.run(cost, range(n + m))
    if status == "unbounded":
        ray = [Fraction(0)] * (n + m)
        ray[col] = Fraction(1)
        for i, b in enumerate(tab.basis):
            ray[b] = -tab.rows[i][col]
        return LPResult("unbounded", certificate=tuple(ray[:n]))
    x = [Fraction(0)] * (n + m)
    for i, b in enumerate(tab.basis):
        x[b] = tab.rhs[i]
    red, val = tab.reduced_costs(cost)
    dual = tuple(red[n + i] for i in range(m))
    return LPResult("optimal", val, tuple(x[:n]), dual, None)


def _farkas(p: LinearProgram) -> tuple:
    """Multipliers y >= 0 with A^T y <= 0 and b.y > 0 proving infeasibility."""
    m = len(p.constraints)
    cons = [
        (tuple(-p.constraints[i][0][j] for i in range(m)), Fraction(0)) for j in range(p.dim)
    ]
    cons.append((tuple(Fraction(-1) for _ in range(m)), Fraction(-1)))
    aux = LinearProgram(tuple(b for _, b in p.constraints), tuple(cons), "max")
    return lp_solve(aux, _check_capacity=False).x


# ---------------------------------------------------------------------------
# Monomial ideals and Newton polyhedra


@dataclass(frozen=True, eq=False)
class NewtonPolyhedron:
    """conv(generators) + nonnegative orthant."""

    dim: int
    generators: tuple

    def __post_init__(self):
        gens = tuple(sorted(set(exponent(g, self.dim) for g in self.generators)))
        if not gens:
            raise ValidationError("Newton polyhedron needs at least one generator")
        object.__setattr__(self, "generators", gens)

    @cached_property
    def vertices(self) -> tuple:
        """Generators that are not in the polyhedron spanned by the others."""
        gens = minimal_elements(self.generators)
        if self.dim == 1:
            return tuple(gens)
        if self.dim == 2:
            return _lower_left_chain(gens)
        if len(gens) <= 12:
            return tuple(g for g in gens if len(gens) == 1 or not _primal_contains([h for h in gens if h != g], g))
        # integer copies make the cheap certificates fast
        den = math.lcm(*(c.denominator for g in gens for c in g))
        ints = {g: tuple(int(c * den) for c in g) for g in gens}
        back = {v: g for g, v in ints.items()}
        ig = list(ints.values())
        sure = {back[v] for v in _unique_minimizers(ig)}
        # every vertex is certified or undecided, so the LP only needs those points
        open_ = [g for g in gens if g not in sure and not _on_segment_cone(ig, ints[g])]
        cand = sorted(sure) + open_
        keep = set(sure)
        for g in open_:
            others = [h for h in cand if h != g]
            if not (others and _primal_contains(others, g)):
                keep.add(g)
        return tuple(sorted(keep))

    @cached_property
    def facets(self) -> tuple:
        """Inequalities ``<w, x> >= h`` (w >= 0, primitive-scaled) cutting out the set."""
        verts = self.vertices
        n = self.dim
        axes = [tuple(Fraction(int(i == j)) for i in range(n)) for j in range(n)]
        out = set()
        for k in range(1, n + 1):
            for vs in itertools.combinations(verts, k):
                diffs = [tuple(a - b for a, b in zip(v, vs[0])) for v in vs[1:]]
                for es in itertools.combinations(axes, n - k):
                    ns = nullspace(diffs + list(es), n)
                    if len(ns) != 1:
                        continue
                    w = ns[0]
                    if any(c < 0 for c in w):
                        w = tuple(-c for c in w)
                    if any(c < 0 for c in w):
                        continue
                    h = dot(w, vs[0])
                    if all(dot(w, v) >= h for v in verts):
                        out.add(_normalize_normal(w, h))
        return tuple(sorted(out))

    def contains(self, beta, method: str = "primal") -> bool:
        beta = exponent(beta, self.dim)
        if method == "primal":
            return _primal_contains(self.generators, beta)
        if method == "dual":
            return all(dot(w, beta) >= h for w, h in self.facets)
        raise ValidationError(f"unknown method {method!r}")

    def __eq__(self, other):
        return isinstance(other, NewtonPolyhedron) and self.vertices == other.vertices

    def __hash__(self):
        return hash(self.vertices)


def _lower_left_chain(gens) -> tuple:
    """Planar vertices: monotone chain over the minimal points sorted by x."""
    hull = []
    for p in sorted(gens):
        while len(hull) >= 2:
            o, a = hull[-2], hull[-1]
            if (a[0] - o[0]) * (p[1] - o[1]) - (a[1] - o[1]) * (p[0] - o[0]) > 0:
                break
            hull.pop()
        hull.append(p)
    return tuple(sorted(hull))


def _unique_minimizers(gens, top: int = 4) -> set:
    """Points that alone minimize some positive functional; these are vertices."""
    out = set()
    for w in itertools.product(range(1, top + 1), repeat=len(gens[0])):
        vals = [sum(a * b for a, b in zip(w, g)) for g in gens]
        best = min(vals)
        hits = [g for g, v in zip(gens, vals) if v == best]
        if len(hits) == 1:
            out.add(hits[0])
    return out


def _on_segment_cone(gens, g, near: int = 12) -> bool:
    """True when g dominates a point of a segment between two nearby generators."""
    pool = sorted((h for h in gens if h != g), key=lambda h: sum(abs(a - b) for a, b in zip(h, g)))[:near]
    for h1, h2 in itertools.combinations(pool, 2):
        # lam*h1 + (1-lam)*h2 <= g  <=>  lam*(h1-h2) <= g-h2 for lam in [0, 1]
        # bounds kept as (num, den) with den > 0
        lo, hi, ok = (0, 1), (1, 1), True
        for a, b, c in zip(h1, h2, g):
            d, r = a - b, c - b
            if d > 0:
                if r * hi[1] < hi[0] * d:
                    hi = (r, d)
            elif d < 0:
                if -r * lo[1] > lo[0] * -d:
                    lo = (-r, -d)
            elif r < 0:
                ok = False
            if not ok or lo[0] * hi[1] > hi[0] * lo[1]:
                ok = False
                break
        if ok:
            return True
    return False


def _normalize_normal(w, h):
    scale = next(c for c in w if c != 0)
    return tuple(c / scale for c in w), h / scale


def _primal_contains(gens, beta) -> bool:
    """Feasibility LP: lambda >= 0, sum lambda = 1, sum lambda_i g_i <= beta."""
    k, n = len(gens), len(beta)
    cons = [((Fraction(1),) * k, Fraction(1)), ((Fraction(-1),) * k, Fraction(-1))]
    for j in range(n):
        cons.append((tuple(-g[j] for g in gens), -beta[j]))
    res = lp_solve(LinearProgram((Fraction(0),) * k, tuple(cons)), _check_capacity=False)
    return res.status == "optimal"


def newton_contains(N: NewtonPolyhedron, beta) -> bool:
    """Membership decided by both the primal LP and the facet inequalities."""
    primal = N.contains(beta, "primal")
    dual = N.contains(beta, "dual")
    if primal != dual:  # pragma: no cover - would indicate a solver defect
        raise AssertionError(f"primal/dual membership disagree for {beta}")
    return primal


@dataclass(frozen=True)
class MonomialIdeal:
    """Monomial ideal given by a reduced set of integer exponent generators."""

    dim: int
    generators: tuple

    def __post_init__(self):
        gens = []
        for g in self.generators:
            g = exponent(g, self.dim)
            if any(c.denominator != 1 for c in g):
                raise ValidationError(f"ideal generators must be integer: {g}")
            gens.append(tuple(int(c) for c in g))
        if not gens:
            raise ValidationError("monomial ideal needs at least one generator")
        object.__setattr__(self, "generators", minimal_elements(gens))

    @classmethod
    def _trusted(cls, dim: int, generators: tuple) -> "MonomialIdeal":
        """Skip reduction for generator sets already known to be minimal and sorted."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "dim", dim)
        object.__setattr__(obj, "generators", tuple(generators))
        return obj

    def contains(self, g) -> bool:
        return any(dominates(g, h) for h in self.generators)

    def issubset(self, other: "MonomialIdeal") -> bool:
        return all(other.contains(g) for g in self.generators)

    @cached_property
    def newton_polyhedron(self) -> NewtonPolyhedron:
        return NewtonPolyhedron(self.dim, self.generators)

    def integral_closure_contains(self, g) -> bool:
        return newton_contains(self.newton_polyhedron, g)

    def to_json(self) -> dict:
        return {"dim": self.dim, "generators": [list(g) for g in self.generators]}

    @classmethod
    def from_json(cls, data: dict) -> "MonomialIdeal":
        try:
            return cls(int(data["dim"]), tuple(tuple(g) for g in data["generators"]))
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed ideal JSON: {exc}") from exc

    @classmethod
    def unit(cls, dim: int) -> "MonomialIdeal":
        return cls(dim, ((0,) * dim,))

    @classmethod
    def maximal(cls, dim: int) -> "MonomialIdeal":
        return cls(dim, tuple(tuple(int(i == j) for i in range(dim)) for j in range(dim)))
