"""Exact integrability thresholds for toric integrands.

In logarithmic coordinates ``u_j = -log|z_j|`` (u >= 0 on the unit polydisc) the
integrand ``|z^g|^2 e^{-2 phi0} e^{2 t psi} e^{-2 c phi}`` against Lebesgue measure
is ``exp(-2 (A(u) - c D(u)))`` times the angular factor, where

    A(u) = <lin, u> - sum_k p_k min_{beta in P_k} <beta, u>   (twists, convex)
                    + sum_k q_k min_{beta in Q_k} <beta, u>   (factors, concave)

and ``D(u) = scale * min_beta <beta, u>`` is the depth of the weight ``phi``.
``lin`` already contains the Jacobian shift ``g + 1``.  Both A and D are positively
homogeneous, so integrability near the origin holds iff ``A - c D > 0`` on the
orthant minus the origin, and the threshold is ``min {A(u) : D(u) >= 1}``.

Concave terms are handled by enumerating their linear pieces; convex terms by an
epigraph variable each.  Every program is solved with the exact simplex.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .errors import DomainError, ValidationError
from .lattice import LinearProgram, dot, lp_solve


@dataclass(frozen=True)
class Integrand:
    dim: int
    lin: tuple
    convex: tuple = ()  # ((coef, pieces), ...)
    concave: tuple = ()

    def value(self, u) -> Fraction:
        """A(u)."""
        val = dot(self.lin, u)
        for coef, pieces in self.convex:
            val -= coef * min(dot(b, u) for b in pieces)
        for coef, pieces in self.concave:
            val += coef * min(dot(b, u) for b in pieces)
        return val

    def minus_weight(self, c, weight) -> "Integrand":
        """The integrand with ``e^{-2 c weight}`` folded in."""
        c = Fraction(c)
        if c == 0:
            return self
        term = (abs(c) * weight.scale, weight.pieces)
        if c > 0:
            return Integrand(self.dim, self.lin, self.convex + (term,), self.concave)
        return Integrand(self.dim, self.lin, self.convex, self.concave + (term,))

    def at_vertex_directions(self, v) -> "Integrand":
        """Directional derivative of A at ``v`` as a function of the direction."""
        def active(pieces):
            m = min(dot(b, v) for b in pieces)
            return tuple(b for b in pieces if dot(b, v) == m)

        return Integrand(
            self.dim,
            self.lin,
            tuple((c, active(p)) for c, p in self.convex),
            tuple((c, active(p)) for c, p in self.concave),
        )


def build_integrand(dim, numerator=None, twists=(), factors=(), monomial_powers=()):
    """Integrand for ``|z^numerator|^2 prod e^{-2 phi0} prod e^{2 t psi} prod |z^f|^{2t}``.

    ``factors`` are ``(t, ToricWeight)`` pairs, ``monomial_powers`` are ``(t, f)``.
    """
    g = numerator if numerator is not None else (0,) * dim
    if len(g) != dim:
        raise ValidationError(f"numerator dimension {len(g)} != {dim}")
    lin = [Fraction(x) + 1 for x in g]
    convex, concave = [], []
    for w in twists:
        _check_dim(w, dim)
        if not w.is_zero:
            convex.append((w.scale, w.pieces))
    for t, w in factors:
        _check_dim(w, dim)
        t = Fraction(t)
        if t > 0:
            concave.append((t * w.scale, w.pieces))
        elif t < 0:
            convex.append((-t * w.scale, w.pieces))
    for t, f in monomial_powers:
        if len(f) != dim:
            raise ValidationError(f"monomial dimension {len(f)} != {dim}")
        lin = [a + Fraction(t) * Fraction(b) for a, b in zip(lin, f)]
    return Integrand(dim, tuple(lin), tuple(convex), tuple(concave))


def _check_dim(w, dim):
    if w.dim != dim:
        raise ValidationError(f"weight dimension {w.dim} != {dim}")


def _minimize(integ: Integrand, base_rows):
    """min A(u) subject to ``base_rows`` (rows on the u-block, sense >=)."""
    n = integ.dim
    k = len(integ.convex)
    best = None
    choices = itertools.product(*(pieces for _, pieces in integ.concave)) if integ.concave else [()]
    for choice in choices:
        obj_u = list(integ.lin)
        for (coef, _), beta in zip(integ.concave, choice):
            obj_u = [a + coef * b for a, b in zip(obj_u, beta)]
        obj = tuple(obj_u) + tuple(-coef for coef, _ in integ.convex)
        rows = [(tuple(r) + (Fraction(0),) * k, b) for r, b in base_rows]
        for idx, (_, pieces) in enumerate(integ.convex):
            for beta in pieces:
                tail = tuple(Fraction(-1) if i == idx else Fraction(0) for i in range(k))
                rows.append((tuple(beta) + tail, Fraction(0)))
        res = lp_solve(LinearProgram(obj, tuple(rows)))
        if res.status == "infeasible":
            return "infeasible", None, None
        if res.status == "unbounded":
            return "unbounded", None, None
        if best is None or res.value < best[0]:
            best = (res.value, res.x[:n])
    return "optimal", best[0], best[1]


def positivity_margin(integ: Integrand):
    """``min A`` on ``{u >= 0, sum u >= 1}``; None when unbounded below.

    A is positive on the orthant minus the origin iff the margin is > 0.
    """
    row = ((Fraction(1),) * integ.dim, Fraction(1))
    status, val, u = _minimize(integ, [row])
    if status != "optimal":
        return None, None
    return val, u


def is_positive(integ: Integrand) -> bool:
    val, _ = positivity_margin(integ)
    return val is not None and val > 0


def weight_rows(weight):
    return [(tuple(weight.scale * b for b in beta), Fraction(1)) for beta in weight.pieces]


def threshold(integ: Integrand, weight):
    """``sup {c : A - c D > 0 on the punctured orthant}`` with its minimizing u.

    Raises DomainError when the reference integrand itself is not integrable.
    """
    if weight.is_zero:
        raise ValidationError("weight is bounded near o; its threshold is infinite")
    margin, witness = positivity_margin(integ)
    if margin is None or margin <= 0:
        raise DomainError(
            f"reference integrand is not integrable near o (witness direction {witness})"
        )
    status, val, u = _minimize(integ, weight_rows(weight))
    if status != "optimal":  # pragma: no cover - excluded by positivity
        raise DomainError(f"threshold program is {status}")
    return val, u


def min_over_superlevel(integ: Integrand, weight):
    """``min {A(u) : D(u) >= 1}`` without any positivity precondition."""
    if weight.is_zero:
        raise ValidationError("weight is bounded near o")
    return _minimize(integ, weight_rows(weight))
