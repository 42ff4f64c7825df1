"""Theorem suites behind ``plurival verify``.

Each suite draws seeded random fixtures, checks one statement exactly (or at the
stated float tolerance), and reports the anchor of the statement it exercises.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .approximation import (
    green_approximant_log,
    pointwise_convergence,
    product_grid,
)
from .errors import DomainError, PreconditionError
from .integrability import (
    JumpingQuery,
    divides,
    inclusion_equivalence,
    is_integrable,
    jumping_number,
    lct,
    thmA_check,
    zhou_valuation,
)
from .integrals import mass_asymptotics, sublevel_closed_form, sublevel_monte_carlo
from .lattice import MonomialIdeal
from .tian import derivative_at_zero, threshold_b0, tian_function
from .weights import (
    DiagonalZhouWeight,
    ReferencePair,
    ToricWeight,
    normalize_direction,
    relative_type,
    toric_maximality,
    weight_max,
    weight_sum,
    zhou_weight_for,
)


@dataclass
class CriterionResult:
    number: int
    suite: str
    anchor: str
    passed: bool
    fixtures: int
    elapsed: float
    limit: float
    detail: str

    @property
    def within_time(self) -> bool:
        return self.elapsed < self.limit

    @property
    def ok(self) -> bool:
        return self.passed and self.within_time

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        return (
            f"[{status}] {self.number:2d} {self.suite:<15} anchor={self.anchor}"
            f" fixtures={self.fixtures} time={self.elapsed:.2f}s/<{self.limit:g}s {self.detail}"
        )

    def to_json(self) -> dict:
        return {
            "criterion": self.number,
            "suite": self.suite,
            "anchor": self.anchor,
            "passed": self.passed,
            "within_time": self.within_time,
            "fixtures": self.fixtures,
            "elapsed_s": round(self.elapsed, 3),
            "limit_s": self.limit,
            "detail": self.detail,
        }


# ---------------------------------------------------------------------------
# Random fixtures


def random_direction(rng: random.Random, n: int) -> tuple:
    return normalize_direction(tuple(Fraction(rng.randint(1, 6), rng.randint(1, 2)) for _ in range(n)))


def random_diagonal(rng: random.Random, n: int, scaled: bool = True) -> DiagonalZhouWeight:
    s = Fraction(rng.randint(1, 4), rng.randint(1, 3)) if scaled else Fraction(1)
    return DiagonalZhouWeight(random_direction(rng, n), s)


def random_exponent(rng: random.Random, n: int, hi: int = 5) -> tuple:
    return tuple(rng.randint(0, hi) for _ in range(n))


def random_toric(rng: random.Random, n: int, pieces: int = 3, hi: int = 4, positive: bool = False) -> ToricWeight:
    """Random non-bounded toric weight; ``positive`` forces every piece nonzero in every entry."""
    lo = 1 if positive else 0
    while True:
        pcs = [tuple(rng.randint(lo, hi) for _ in range(n)) for _ in range(rng.randint(1, pieces))]
        if all(any(c for c in p) for p in pcs):
            return ToricWeight(tuple(pcs), Fraction(rng.randint(1, 3), rng.randint(1, 2)))


def random_ideal(rng: random.Random, n: int, gens: int = 3, hi: int = 4) -> MonomialIdeal:
    return MonomialIdeal(n, tuple(random_exponent(rng, n, hi) for _ in range(rng.randint(1, gens))))


def random_reference(rng: random.Random, n: int, phi0_pieces: int = 1) -> ReferencePair:
    """Monomial ``f0`` with a toric twist that keeps the reference integrable."""
    while True:
        gamma = random_exponent(rng, n, 3)
        if rng.random() < 0.3:
            return ReferencePair.monomial(gamma)
        pcs = tuple(random_exponent(rng, n, 2) for _ in range(phi0_pieces))
        if any(all(c == 0 for c in p) for p in pcs):
            continue
        phi0 = ToricWeight(pcs, Fraction(1, rng.randint(2, 4)))
        try:
            return ReferencePair.monomial(gamma, phi0)
        except DomainError:
            continue


# ---------------------------------------------------------------------------
# Suites


def _valuation(rng, n_fixtures=1000):
    bad = 0
    for _ in range(n_fixtures):
        n = rng.randint(1, 4)
        phi = DiagonalZhouWeight(random_direction(rng, n))
        f, g = random_exponent(rng, n, 6), random_exponent(rng, n, 6)
        nf, ng = zhou_valuation(f, phi), zhou_valuation(g, phi)
        fg = tuple(x + y for x, y in zip(f, g))
        # oracle: sum_j g_j / a_j in exact arithmetic
        oracle = sum(Fraction(x) / a for x, a in zip(f, phi.a))
        if zhou_valuation(fg, phi) != nf + ng or nf != oracle or zhou_valuation((0,) * n, phi) != 0:
            bad += 1
        # binomial f + g: the valuation of a sum of monomials is the min
        if f != g and relative_type(ToricWeight((f, g)), phi) != min(nf, ng) and any(f) and any(g):
            bad += 1
    return bad == 0, n_fixtures, f"violations={bad}"


def _tropical(rng, n_fixtures=1000):
    bad = 0
    for i in range(n_fixtures):
        n = rng.randint(1, 3)
        phi = random_diagonal(rng, n)
        p1, p2 = random_toric(rng, n), random_toric(rng, n)
        s1, s2 = relative_type(p1, phi), relative_type(p2, phi)
        if relative_type(weight_max(p1, p2), phi) != min(s1, s2):
            bad += 1
        c1, c2 = Fraction(rng.randint(0, 4), rng.randint(1, 3)), Fraction(rng.randint(0, 4), rng.randint(1, 3))
        terms = [p.scaled(c) for p, c in ((p1, c1), (p2, c2)) if c > 0]
        if terms:
            combo = terms[0] if len(terms) == 1 else weight_sum(*terms)
            if relative_type(combo, phi) != c1 * s1 + c2 * s2:
                bad += 1
        if i % 10 == 0 and relative_type(p1, phi.toric) != s1:  # LP route against the closed form
            bad += 1
    return bad == 0, n_fixtures, f"violations={bad}"


def _jumping(rng, n_identity=1000, n_general=500):
    bad = 0
    for _ in range(n_identity):
        n = rng.randint(1, 3)
        phi = DiagonalZhouWeight(random_direction(rng, n))
        G = random_ideal(rng, n)
        nu = min(zhou_valuation(g, phi) for g in G.generators)
        if nu + 1 != jumping_number(JumpingQuery(phi.toric, G)):
            bad += 1
    general = skipped = 0
    while general < n_general:
        n = rng.randint(2, 3)
        ref = random_reference(rng, n)
        phi = zhou_weight_for(ref, random_direction(rng, n))
        if not toric_maximality(ref, phi)[0]:
            skipped += 1
            continue
        general += 1
        G = random_ideal(rng, n)
        nu = min(zhou_valuation(g, phi) for g in G.generators)
        c = jumping_number(JumpingQuery(phi.toric, G))
        f0 = ToricWeight.monomial(ref.f0.generators[0])
        lower = nu + lct(phi.toric)
        upper = nu - relative_type(f0, phi) + 1 + relative_type(ref.phi0, phi)
        if not lower <= c <= upper:
            bad += 1
    return bad == 0, n_identity + n_general, f"violations={bad} non-maximal-skipped={skipped}"


def _tian_reference(rng, n):
    """Reference dominating one psi piece so Tn is defined down to t = -1."""
    psi = random_toric(rng, n, positive=True)
    beta = rng.choice(psi.folded)
    extra = random_exponent(rng, n, 2)
    if rng.random() < 0.5:
        phi0 = ToricWeight.monomial(random_exponent(rng, n, 2), Fraction(1, 2))
        beta0 = phi0.folded[0]
    else:
        phi0, beta0 = ToricWeight.zero(n), (0,) * n
    gamma = tuple(math.ceil(b) + math.ceil(b0) + e for b, b0, e in zip(beta, beta0, extra))
    return ReferencePair.monomial(gamma, phi0), psi


def _tian(rng, n_fixtures=200):
    bad = 0
    for _ in range(n_fixtures):
        n = rng.randint(2, 3)
        ref, psi = _tian_reference(rng, n)
        phi = zhou_weight_for(ref, random_direction(rng, n))
        T = tian_function(phi, psi=psi, ref=ref, t_range=(-1, 4))
        sigma = relative_type(psi, phi)
        right = derivative_at_zero(T, "right")
        on_right = [t for t in T.knots if t >= 0] + [Fraction(4)]
        linear = all(T(t) == 1 + sigma * t for t in on_right)
        if not (T.value_at_0 == 1 and right == sigma and linear and T.is_concave()):
            bad += 1
        if derivative_at_zero(T, "left") < right:
            bad += 1
    return bad == 0, n_fixtures, f"violations={bad}"


def _threshold(rng, n_fixtures=100):
    bad = 0
    for _ in range(n_fixtures):
        n = rng.randint(2, 3)
        ref = random_reference(rng, n)
        u = zhou_weight_for(ref, random_direction(rng, n)).toric
        v = random_toric(rng, n, positive=True)
        rep = threshold_b0(u, v, ref)
        # invariance also strictly inside b <= b0
        q = JumpingQuery(weight_max(u, v.scaled(2 / rep.b0)), ref.f0, ref.phi0)
        inside = jumping_number(q) == rep.tn0 and not is_integrable(q, rep.tn0)
        if not (rep.ok and inside):
            bad += 1
    return bad == 0, n_fixtures, f"violations={bad}"


def _factorable(rng, n):
    while True:
        ref = random_reference(rng, n)
        try:
            sublevel_closed_form(ref, DiagonalZhouWeight(random_direction(rng, n)), None, 1)
            return ref
        except PreconditionError:
            continue


def _integral(rng, n_fixtures=50, mc_fixtures=2, samples=1_000_000):
    bad = 0
    for _ in range(n_fixtures):
        n = rng.randint(1, 3)
        ref = _factorable(rng, n)
        phi = random_diagonal(rng, n)
        psi = ToricWeight.monomial(random_exponent(rng, n, 3) if n > 1 else (rng.randint(1, 3),))
        if psi.is_zero:
            psi = ToricWeight.monomial((1,) * n)
        sigma = relative_type(psi, phi)
        ex = sublevel_closed_form(ref, phi, psi, 1).exact
        # the 1/t coefficient recomputed from per-axis exponential means
        c = [Fraction(g) + 1 - b for g, b in zip(ref.f0.generators[0], ref.phi0.folded[0])]
        inv_t = sum(b / (2 * cj) for b, cj in zip(psi.folded[0], c))
        if ex.ratio_const != sigma or ex.ratio_inv_t != inv_t:
            bad += 1
    worst = 0.0
    for k in range(mc_fixtures):
        n = 2
        ref = ReferencePair.trivial(n) if k == 0 else _factorable(rng, n)
        phi = DiagonalZhouWeight((2, 2)) if k == 0 else random_diagonal(rng, n)
        psi = ToricWeight.monomial((1, 0)) if k == 0 else ToricWeight.monomial(random_exponent(rng, n, 2) or (1, 1))
        if psi.is_zero:
            psi = ToricWeight.monomial((1, 1))
        cf = sublevel_closed_form(ref, phi, psi, 8)
        mc = sublevel_monte_carlo(ref, phi, psi, 8, samples, seed=rng.randint(0, 2**31), workers=4)
        z = abs(mc.ratio - cf.ratio) / mc.stderr
        worst = max(worst, z)
        if z > 3:
            bad += 1
    return bad == 0, n_fixtures + mc_fixtures, f"violations={bad} worst_mc_z={worst:.2f}"


def _mass(rng, n_fixtures=50):
    bad = 0
    for k in range(n_fixtures):
        n = rng.randint(1, 3)
        if k == 0:
            ref = ReferencePair.monomial((0, 0), ToricWeight.monomial((1, 1), Fraction(1, 2)))
        else:
            ref = _factorable(rng, n)
        phi = zhou_weight_for(ref, random_direction(rng, ref.dim))
        rep = mass_asymptotics(ref, phi, (1, 2, 4, 8, 16, 32))
        constant = all(abs(x - float(rep.scaled_constant)) <= 1e-12 * float(rep.scaled_constant) for x in rep.scaled)
        if not (rep.normalized and rep.ok and constant):
            bad += 1
        if k == 0 and abs(rep.log_rates[-1] - 1) > 1e-12:  # prod 2c_j = 1: raw value exact
            bad += 1
        # jumping number 9/10: e^{2t} mass must blow up
        sub = mass_asymptotics(ref, DiagonalZhouWeight(phi.a, phi.scale * Fraction(10, 9)), (1, 2, 4, 8, 16, 32))
        if sub.normalized or sub.threshold != Fraction(9, 10) or not all(x < y for x, y in zip(sub.scaled, sub.scaled[1:])):
            bad += 1
    return bad == 0, n_fixtures, f"violations={bad}"


def _thmA(rng, n_fixtures=20):
    bad = exact = boundary = 0
    while exact < n_fixtures:
        n = 2 if exact < n_fixtures - 4 else 3
        I = random_ideal(rng, n)
        phi = random_toric(rng, n)
        rep = thmA_check(I, phi)
        if rep.gap_flag:
            boundary += 1
            if rep.grid_exceeds:
                bad += 1
            continue
        exact += 1
        if not (rep.exact_equality and rep.ok):
            bad += 1
    return bad == 0, n_fixtures, f"violations={bad} boundary-direction-skipped={boundary}"


def _multiplier(rng, n_fixtures=200):
    bad = 0
    for i in range(n_fixtures):
        n = 2 if i % 10 else 3
        u, v = random_toric(rng, n, hi=3), random_toric(rng, n, hi=3)
        if not inclusion_equivalence(u, v, t_max=20).agree:
            bad += 1
    return bad == 0, n_fixtures, f"disagreements={bad}"


def _division(rng, n_fixtures=1000):
    bad = 0
    for _ in range(n_fixtures):
        n = rng.randint(1, 4)
        g = random_exponent(rng, n, 4)
        f = tuple(x + rng.randint(0, 2) for x in g) if rng.random() < 0.4 else random_exponent(rng, n, 4)
        d = divides(f, g)
        if not d.agree:
            bad += 1
    return bad == 0, n_fixtures, f"disagreements={bad}"


APPROX_FIXTURES = ((2, 2), (3, "3/2"), (4, "4/3"), (6, "6/5"), ("5/2", "5/3"), (3, 3, 3), (2, 4, 4), (6, 3, 2), (2, 3, 6), ("3/2", 6, 6))


def _approximation(rng, m_max=64):
    bad = 0
    for a in APPROX_FIXTURES:
        phi = DiagonalZhouWeight(a)
        rep = pointwise_convergence(phi, product_grid(0.2, 0.8, 3, phi.dim), range(1, m_max + 1))
        if not rep.ok:
            bad += 1
    rep = pointwise_convergence(DiagonalZhouWeight((2, 2)), [(0.5, 0.5)], range(1, m_max + 1))
    for m, gap in zip(rep.m_list, rep.sup_gaps):
        if abs(gap - math.log(2) / m) > 1e-12:
            bad += 1
    for _ in range(50):
        n = rng.randint(1, 3)
        u = tuple(Fraction(rng.randint(1, 20), rng.randint(1, 7)) for _ in range(n))
        m = rng.randint(1, 12)
        if green_approximant_log(m, u) != -min(u):
            bad += 1
    return bad == 0, len(APPROX_FIXTURES), f"violations={bad}"


def _reproducibility(rng, samples=200_000):
    bad = 0
    ref = ReferencePair.monomial((0, 0), ToricWeight(((1, 0), (0, 1)), Fraction(1, 3)))
    phi = DiagonalZhouWeight((2, 2))
    psi = ToricWeight.log_norm(2)
    for workers in (1, 3):
        seed = rng.randint(0, 2**31)
        a = sublevel_monte_carlo(ref, phi, psi, 8, samples, seed, workers)
        b = sublevel_monte_carlo(ref, phi, psi, 8, samples, seed, workers)
        if repr(a).encode() != repr(b).encode():
            bad += 1
    return bad == 0, 2, f"mismatches={bad}"


SUITES: dict[str, tuple[int, str, float, Callable]] = {
    "valuation": (1, "valuation-axioms", 5, _valuation),
    "tropical": (2, "tropical-multiplicative-additive", 10, _tropical),
    "jumping": (3, "jumping-number-valuation-identity", 10, _jumping),
    "tian": (4, "tian-linearity-differentiable-at-0", 30, _tian),
    "threshold": (5, "max-threshold-iff-b-le-b0", 30, _threshold),
    "integral": (6, "sublevel-integral-formula", 60, _integral),
    "mass": (7, "sublevel-mass-asymptotics", 10, _mass),
    "thmA": (8, "jumping-number-sup-over-zhou-weights", 60, _thmA),
    "multiplier": (9, "multiplier-ideal-valuative-equivalence", 120, _multiplier),
    "division": (10, "division-by-valuations", 5, _division),
    "approximation": (11, "approximation-relative-type-bounds", 60, _approximation),
    "reproducibility": (12, "stochastic-reproducibility", 60, _reproducibility),
}


def run_suite(name: str, seed: int = 20240601) -> CriterionResult:
    if name not in SUITES:
        raise KeyError(name)
    number, anchor, limit, fn = SUITES[name]
    rng = random.Random(f"{seed}:{name}")
    start = time.perf_counter()
    passed, count, detail = fn(rng)
    elapsed = time.perf_counter() - start
    return CriterionResult(number, name, anchor, passed, count, elapsed, limit, detail)


def run_all(seed: int = 20240601, names=None) -> list[CriterionResult]:
    return [run_suite(n, seed) for n in (names or SUITES)]
