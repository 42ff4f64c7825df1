"""Toric plurisubharmonic germs and their tropical algebra.

A toric weight ``c log max_beta |z^beta|`` is stored constant-free as a reduced
piece set plus a positive scale.  In logarithmic coordinates its *depth*
``D(u) = c min_beta <beta, u>`` is the negative of its value; every germ
statement (``+ O(1)``) becomes an exact statement about Newton polyhedra of
the folded pieces ``c * beta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Sequence

from . import engine
from .errors import DomainError, ValidationError
from .lattice import (
    MonomialIdeal,
    NewtonPolyhedron,
    as_rational,
    dot,
    exponent,
    format_rational,
)


@dataclass(frozen=True, eq=False)
class ToricWeight:
    pieces: tuple
    scale: Fraction = Fraction(1)

    def __post_init__(self):
        pieces = [exponent(p) for p in self.pieces]
        if not pieces:
            raise ValidationError("toric weight needs at least one piece")
        dim = len(pieces[0])
        if any(len(p) != dim for p in pieces):
            raise ValidationError("all pieces must share one dimension")
        scale = as_rational(self.scale)
        if scale <= 0:
            raise ValidationError(f"scale must be positive, got {scale}")
        object.__setattr__(self, "pieces", NewtonPolyhedron(dim, pieces).vertices)
        object.__setattr__(self, "scale", scale)

    @classmethod
    def _trusted(cls, pieces: tuple, scale: Fraction) -> "ToricWeight":
        # caller guarantees pieces are already the Newton vertices
        obj = object.__new__(cls)
        object.__setattr__(obj, "pieces", pieces)
        object.__setattr__(obj, "scale", scale)
        return obj

    @property
    def dim(self) -> int:
        return len(self.pieces[0])

    @property
    def is_zero(self) -> bool:
        return any(all(c == 0 for c in p) for p in self.pieces)

    @cached_property
    def folded(self) -> tuple:
        """Canonical germ representative: pieces times scale."""
        return tuple(sorted(tuple(self.scale * c for c in p) for p in self.pieces))

    @cached_property
    def newton(self) -> NewtonPolyhedron:
        return NewtonPolyhedron(self.dim, self.folded)

    def depth(self, u) -> Fraction:
        return self.scale * min(dot(p, u) for p in self.pieces)

    def log_value(self, u) -> Fraction:
        """Value at the point with ``-log|z_j| = u_j``."""
        return -self.depth(u)

    def __call__(self, z) -> float:
        logs = [math.log(abs(zj)) if zj != 0 else -math.inf for zj in z]
        vals = []
        for p in self.pieces:
            s = 0.0
            for c, lz in zip(p, logs):
                if c:
                    s += float(c) * lz
            vals.append(s)
        return float(self.scale) * max(vals)

    def scaled(self, c) -> "ToricWeight":
        c = as_rational(c)
        if c <= 0:
            raise ValidationError("scaling factor must be positive")
        return ToricWeight(self.pieces, self.scale * c)

    def germ_le(self, other: "ToricWeight") -> bool:
        """``self <= other + O(1)``: every folded piece lies in other's polyhedron."""
        _same_dim(self, other)
        return all(other.newton.contains(b) for b in self.folded)

    def __eq__(self, other):
        return isinstance(other, ToricWeight) and self.newton == other.newton

    def __hash__(self):
        return hash(self.newton)

    def __repr__(self):
        pcs = ", ".join("(" + ",".join(format_rational(c) for c in p) + ")" for p in self.pieces)
        return f"ToricWeight({{{pcs}}}, scale={format_rational(self.scale)})"

    @classmethod
    def monomial(cls, beta, scale=1) -> "ToricWeight":
        return cls((tuple(beta),), scale)

    @classmethod
    def zero(cls, dim: int) -> "ToricWeight":
        return cls(((0,) * dim,))

    @classmethod
    def log_norm(cls, dim: int) -> "ToricWeight":
        """``log max_j |z_j|`` (equivalently ``log |z|``)."""
        return cls(tuple(tuple(int(i == j) for i in range(dim)) for j in range(dim)))

    @classmethod
    def from_ideal(cls, ideal: MonomialIdeal, scale=1) -> "ToricWeight":
        """``scale * log |I|``, generators taken as pieces."""
        return cls(ideal.generators, scale)

    def to_json(self) -> dict:
        return {
            "pieces": [[format_rational(c) for c in p] for p in self.pieces],
            "scale": format_rational(self.scale),
        }

    @classmethod
    def from_json(cls, data: dict) -> "ToricWeight":
        try:
            return cls(tuple(tuple(p) for p in data["pieces"]), data.get("scale", 1))
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed weight JSON: {exc}") from exc


@dataclass(frozen=True, eq=False)
class DiagonalZhouWeight:
    """``scale * log max_j |z_j|^{a_j}`` with ``sum 1/a_j = 1``."""

    a: tuple
    scale: Fraction = Fraction(1)

    def __post_init__(self):
        a = tuple(as_rational(x) for x in self.a)
        if not a:
            raise ValidationError("direction must have dimension >= 1")
        if any(x <= 0 for x in a):
            raise ValidationError(f"direction entries must be positive: {a}")
        total = sum(1 / x for x in a)
        if total != 1:
            raise ValidationError(
                f"direction must satisfy sum_j 1/a_j = 1 exactly (got {format_rational(total)})"
            )
        scale = as_rational(self.scale)
        if scale <= 0:
            raise ValidationError("scale must be positive")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "scale", scale)

    @property
    def dim(self) -> int:
        return len(self.a)

    @cached_property
    def toric(self) -> ToricWeight:
        n = self.dim
        # the axis points a_j e_j are pairwise incomparable, hence all vertices
        return ToricWeight._trusted(
            tuple(sorted(tuple(self.a[j] if i == j else Fraction(0) for i in range(n)) for j in range(n))),
            self.scale,
        )

    @property
    def vertex(self) -> tuple:
        """The point of ``{depth >= 1}`` closest to the origin: ``1/(scale a_j)``."""
        return tuple(1 / (self.scale * x) for x in self.a)

    def depth(self, u) -> Fraction:
        return self.scale * min(x * y for x, y in zip(self.a, u))

    def log_value(self, u) -> Fraction:
        return -self.depth(u)

    def __call__(self, z) -> float:
        return self.toric(z)

    def __eq__(self, other):
        return (
            isinstance(other, DiagonalZhouWeight)
            and self.a == other.a
            and self.scale == other.scale
        )

    def __hash__(self):
        return hash((self.a, self.scale))

    def __repr__(self):
        a = ",".join(format_rational(x) for x in self.a)
        return f"DiagonalZhouWeight(a=({a}), scale={format_rational(self.scale)})"

    def to_json(self) -> dict:
        return {"a": [format_rational(x) for x in self.a], "scale": format_rational(self.scale)}

    @classmethod
    def from_json(cls, data: dict) -> "DiagonalZhouWeight":
        try:
            return cls(tuple(data["a"]), data.get("scale", 1))
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed diagonal weight JSON: {exc}") from exc


def normalize_direction(vec: Sequence) -> tuple:
    """Rescale a positive vector so that ``sum 1/a_j = 1``."""
    v = tuple(as_rational(x) for x in vec)
    if not v or any(x <= 0 for x in v):
        raise ValidationError("direction entries must be positive")
    total = sum(1 / x for x in v)
    return tuple(x * total for x in v)


@dataclass(frozen=True)
class ReferencePair:
    """The reference integrand ``|f0|^2 e^{-2 phi0}``; ``f0`` may be a tuple of monomials."""

    f0: MonomialIdeal
    phi0: ToricWeight

    def __post_init__(self):
        if self.f0.dim != self.phi0.dim:
            raise ValidationError("f0 and phi0 dimensions differ")
        for g in self.f0.generators:
            if not engine.is_positive(self.integrand_for(g)):
                raise DomainError(
                    f"|z^{g}|^2 e^{{-2 phi0}} is not integrable near o for phi0={self.phi0}"
                )

    @property
    def dim(self) -> int:
        return self.f0.dim

    def integrand_for(self, g) -> engine.Integrand:
        return engine.build_integrand(self.dim, g, twists=(self.phi0,))

    @classmethod
    def trivial(cls, dim: int) -> "ReferencePair":
        return cls(MonomialIdeal.unit(dim), ToricWeight.zero(dim))

    @classmethod
    def monomial(cls, gamma, phi0: ToricWeight | None = None) -> "ReferencePair":
        dim = len(gamma)
        return cls(MonomialIdeal(dim, (tuple(gamma),)), phi0 or ToricWeight.zero(dim))


def _same_dim(w1, w2):
    if w1.dim != w2.dim:
        raise ValidationError(f"dimension mismatch: {w1.dim} vs {w2.dim}")


def weight_sum(w1: ToricWeight, w2: ToricWeight) -> ToricWeight:
    """Minkowski sum of folded piece sets: the germ ``w1 + w2``."""
    _same_dim(w1, w2)
    pieces = {
        tuple(x + y for x, y in zip(b1, b2)) for b1 in w1.folded for b2 in w2.folded
    }
    return ToricWeight(tuple(pieces))


def weight_max(w1: ToricWeight, w2: ToricWeight) -> ToricWeight:
    """Union of folded piece sets: the germ ``max{w1, w2}``."""
    _same_dim(w1, w2)
    return ToricWeight(tuple(set(w1.folded) | set(w2.folded)))


def relative_type(psi: ToricWeight, phi) -> Fraction:
    """``sigma(psi, phi) = sup{b : psi <= b phi + O(1)}``.

    Closed form for diagonal ``phi = s Phi_a``; an exact program otherwise.
    """
    _same_dim(psi, phi)
    if isinstance(phi, DiagonalZhouWeight):
        return psi.depth(tuple(1 / x for x in phi.a)) / phi.scale
    integ = engine.Integrand(psi.dim, (Fraction(0),) * psi.dim, (), ((psi.scale, psi.pieces),))
    status, val, _ = engine.min_over_superlevel(integ, phi)
    if status != "optimal":  # pragma: no cover - depth of psi is nonnegative
        raise DomainError(f"relative type program is {status}")
    return val


def lelong_number(psi: ToricWeight) -> Fraction:
    return kiselman_number(psi, (1,) * psi.dim)


def kiselman_number(psi: ToricWeight, a: Sequence) -> Fraction:
    """Directional Lelong number against the pole ``log max |z_j|^{1/a_j}``."""
    a = tuple(as_rational(x) for x in a)
    if len(a) != psi.dim:
        raise ValidationError("direction dimension mismatch")
    if any(x <= 0 for x in a):
        raise ValidationError(f"Kiselman direction must be strictly positive: {a}")
    return psi.depth(a)


def zhou_weight_for(ref: ReferencePair, a) -> DiagonalZhouWeight:
    """The diagonal Zhou weight ``s Phi_a`` related to ``ref``.

    ``s`` is the integrability threshold of ``ref * e^{-2 c Phi_a}``, so the result
    meets the two integrability conditions exactly; toric maximality is decided
    separately by :func:`toric_maximality`.
    """
    phi = a if isinstance(a, DiagonalZhouWeight) else DiagonalZhouWeight(tuple(a))
    if phi.dim != ref.dim:
        raise ValidationError("direction and reference dimensions differ")
    unit = DiagonalZhouWeight(phi.a)
    s = min(engine.threshold(ref.integrand_for(g), unit.toric)[0] for g in ref.f0.generators)
    if s <= 0:  # pragma: no cover - threshold() already refuses this
        raise DomainError("reference is not integrable")
    return DiagonalZhouWeight(phi.a, s)


def toric_maximality(ref: ReferencePair, phi: DiagonalZhouWeight):
    """Decide whether ``phi`` is maximal among toric germs keeping ``ref`` non-integrable.

    Returns ``(True, None)`` or ``(False, witness)`` where ``witness`` is a toric
    weight strictly above ``phi`` for which ``ref * e^{-2 witness}`` stays
    non-integrable.  The criterion: the threshold program for ``ref`` against
    ``phi`` must have the vertex ``1/(s a)`` as its unique minimizer.
    """
    v = phi.vertex
    best = None
    for g in ref.f0.generators:
        integ = ref.integrand_for(g)
        status, val, u = engine.min_over_superlevel(integ, phi.toric)
        if status != "optimal":
            raise DomainError("reference is not integrable against phi")
        best = val if best is None else min(best, val)
    if best != 1:
        raise ValidationError(f"phi is not threshold-normalized for ref (threshold {best})")
    for g in ref.f0.generators:
        integ = ref.integrand_for(g)
        status, val, u = engine.min_over_superlevel(integ, phi.toric)
        if val != 1:
            continue
        other = u if u != v else None
        if other is None:
            if integ.value(v) != 1 or not engine.is_positive(integ.at_vertex_directions(v)):
                _, d = engine.positivity_margin(integ.at_vertex_directions(v))
                other = _walk_along(integ, phi, v, d)
        if other is not None:
            k = next(j for j in range(phi.dim) if other[j] > v[j])
            dk = phi.depth(other)
            bump = tuple(dk / other[k] if i == k else 0 for i in range(phi.dim))
            return False, weight_max(phi.toric, ToricWeight.monomial(bump))
    return True, None


def _walk_along(integ, phi, v, d):
    """A second minimizer ``v + e d`` on the flat direction ``d`` (d >= 0)."""
    if d is None:
        return None
    eps = Fraction(1)
    for _ in range(64):
        cand = tuple(x + eps * y for x, y in zip(v, d))
        if integ.value(cand) == phi.depth(cand) and cand != v:
            return cand
        eps /= 2
    return None  # pragma: no cover


def compare_zhou(phi1: DiagonalZhouWeight, phi2: DiagonalZhouWeight) -> str:
    """Germ order between two diagonal weights, decided on coordinate monomials.

    Returns ``"equal"``, ``"less"`` (phi1 <= phi2 + O(1)), ``"greater"`` or
    ``"incomparable"``.  Within the normalized family only ``"equal"`` and
    ``"incomparable"`` can occur.
    """
    _same_dim(phi1, phi2)
    n = phi1.dim
    s1 = [relative_type(ToricWeight.monomial(_unit(n, j)), phi1) for j in range(n)]
    s2 = [relative_type(ToricWeight.monomial(_unit(n, j)), phi2) for j in range(n)]
    le = all(x <= y for x, y in zip(s1, s2))
    ge = all(x >= y for x, y in zip(s1, s2))
    if le and ge:
        return "equal"
    if le:
        return "less"
    if ge:
        return "greater"
    return "incomparable"


def _unit(n, j):
    return tuple(int(i == j) for i in range(n))
