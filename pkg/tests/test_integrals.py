import math
import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import nquad

from conftest import directions, exponents
from plurival import (
    DiagonalZhouWeight,
    PreconditionError,
    ReferencePair,
    ToricWeight,
    ValidationError,
    mass_asymptotics,
    ratio_convergence,
    relative_type,
    sublevel_closed_form,
    sublevel_monte_carlo,
)
from plurival import integrals

F = Fraction
PHI22 = DiagonalZhouWeight((2, 2))
TRIV2 = ReferencePair.trivial(2)
Z1 = ToricWeight.monomial((1, 0))


def quad_integrals(ref, phi, psi, t):
    """Mass and moment by adaptive quadrature in log coordinates."""
    g = ref.f0.generators[0]
    beta0 = ref.phi0.folded[0]
    c = [float(x + 1 - b) for x, b in zip(g, beta0)]
    box = [float(t / (phi.scale * a)) for a in phi.a]
    ranges = [(b, b + 40.0 / cj) for b, cj in zip(box, c)]

    def dens(*u):
        return math.exp(-2.0 * sum(cj * x for cj, x in zip(c, u)))

    def mom(*u):
        return dens(*u) * float(psi.scale) * min(sum(float(p) * x for p, x in zip(pc, u)) for pc in psi.pieces)

    def inner_opts(*rest):
        # kinks of min over psi pieces along the innermost axis
        pts = []
        pcs = [[float(x) for x in pc] for pc in psi.pieces]
        for i, p in enumerate(pcs):
            for q in pcs[i + 1:]:
                d = p[0] - q[0]
                if d:
                    x = sum((qq - pp) * r for pp, qq, r in zip(p[1:], q[1:], rest)) / d
                    if ranges[0][0] < x < ranges[0][1]:
                        pts.append(x)
        opts = {"epsrel": 1e-11, "epsabs": 0, "limit": 200}
        if pts:
            opts["points"] = pts
        return opts

    opts = [inner_opts] + [{"epsrel": 1e-11, "epsabs": 0, "limit": 200}] * (len(c) - 1)
    mass = nquad(dens, ranges, opts=opts)[0]
    moment = nquad(mom, ranges, opts=opts)[0]
    return mass, moment


def test_factorable_ratio_example():
    res = sublevel_closed_form(TRIV2, PHI22, Z1, 10)
    assert res.exact.ratio_at(10) == F(11, 20)
    assert res.ratio == pytest.approx(0.55, abs=1e-15)
    assert res.exact.ratio_const == F(1, 2) == relative_type(Z1, PHI22)
    assert res.stderr == 0


def test_zero_psi():
    res = sublevel_closed_form(TRIV2, DiagonalZhouWeight((3, F(3, 2))), ToricWeight.zero(2), 2)
    assert res.moment == 0 and res.ratio == 0


def test_closed_form_refusals():
    multi = ReferencePair.monomial((2, 2), ToricWeight.log_norm(2))
    with pytest.raises(PreconditionError):
        sublevel_closed_form(multi, PHI22, Z1, 1)
    with pytest.raises(PreconditionError):
        sublevel_closed_form(TRIV2, PHI22, ToricWeight(((1, 1), (2, 0))), 1)
    with pytest.raises(ValidationError):
        sublevel_closed_form(TRIV2, PHI22, Z1, 0)


@pytest.mark.parametrize(
    "ref,phi,psi,t",
    [
        (TRIV2, PHI22, Z1, 3),
        (ReferencePair.monomial((1, 0)), DiagonalZhouWeight((3, F(3, 2)), F(5, 4)), ToricWeight.monomial((1, 2)), 2),
        (ReferencePair.monomial((0, 1), ToricWeight.monomial((1, 0), F(1, 2))), PHI22, ToricWeight.log_norm(2), 2),
        (TRIV2, DiagonalZhouWeight((3, F(3, 2))), ToricWeight.log_norm(2), 3),
        (ReferencePair.trivial(1), DiagonalZhouWeight((1,), 2), ToricWeight.monomial((3,)), 1),
    ],
)
def test_closed_form_against_quadrature(ref, phi, psi, t):
    res = sublevel_closed_form(ref, phi, psi, t)
    mass, moment = quad_integrals(ref, phi, psi, t)
    assert res.mass == pytest.approx(mass, rel=1e-8)
    assert res.moment == pytest.approx(moment, rel=1e-7)


@given(st.integers(1, 2).flatmap(lambda n: st.tuples(directions(n), exponents(n, 3), exponents(n, 3), st.integers(1, 4))))
def test_closed_form_quadrature_property(data):
    a, gamma, beta, t = data
    if not any(beta):
        beta = (1,) * len(a)
    ref, phi, psi = ReferencePair.monomial(gamma), DiagonalZhouWeight(a), ToricWeight.monomial(beta)
    res = sublevel_closed_form(ref, phi, psi, t)
    mass, moment = quad_integrals(ref, phi, psi, t)
    assert res.mass == pytest.approx(mass, rel=1e-7)
    assert res.ratio == pytest.approx(moment / (t * mass), rel=1e-7)


def test_monte_carlo_factorable():
    mc = sublevel_monte_carlo(TRIV2, PHI22, Z1, 10, 1_000_000, seed=7)
    assert abs(mc.ratio - 0.55) <= 3 * mc.stderr
    assert mc.method == "monte_carlo" and mc.ess > 100


def test_monte_carlo_multi_piece_psi():
    psi = ToricWeight.log_norm(2)
    mc = sublevel_monte_carlo(TRIV2, PHI22, psi, 8, 1_000_000, seed=11)
    assert abs(mc.ratio - 0.5) <= 3 * mc.stderr + 1 / 16
    cf = sublevel_closed_form(TRIV2, PHI22, psi, 8)
    assert abs(mc.ratio - cf.ratio) <= 3 * mc.stderr


def test_monte_carlo_multi_piece_phi0():
    ref = ReferencePair.monomial((1, 1), ToricWeight.log_norm(2))
    mc = sublevel_monte_carlo(ref, PHI22, Z1, 4, 400_000, seed=3)
    # quadrature over the box with the non-factorable density
    box = 2.0

    def dens(u1, u2):
        return math.exp(-4.0 * (u1 + u2) + 2.0 * min(u1, u2))

    rng = [(box, box + 30), (box, box + 30)]
    mass = nquad(dens, rng, opts={"epsrel": 1e-10})[0]
    moment = nquad(lambda u1, u2: dens(u1, u2) * u1, rng, opts={"epsrel": 1e-10})[0]
    assert abs(mc.ratio - moment / (4 * mass)) <= 3 * mc.stderr
    assert abs(mc.mass - mass) <= 3 * mc.mass_stderr


def test_stderr_scaling():
    small = sublevel_monte_carlo(TRIV2, PHI22, Z1, 10, 10_000, seed=1)
    big = sublevel_monte_carlo(TRIV2, PHI22, Z1, 10, 1_000_000, seed=1)
    assert 5 < small.stderr / big.stderr < 20


def test_monte_carlo_validation(monkeypatch):
    with pytest.raises(ValidationError):
        sublevel_monte_carlo(TRIV2, PHI22, Z1, 1, 100, seed=1)
    with pytest.raises(ValidationError):
        sublevel_monte_carlo(TRIV2, PHI22, Z1, 1, 10_000, seed=None)
    monkeypatch.setattr(integrals, "MIN_ESS", 10**9)
    with pytest.raises(PreconditionError, match="effective sample size"):
        sublevel_monte_carlo(TRIV2, PHI22, Z1, 1, 10_000, seed=1)


def test_reproducible_bytes(monkeypatch):
    ref = ReferencePair.monomial((0, 0), ToricWeight(((1, 0), (0, 1)), F(1, 3)))
    psi = ToricWeight.log_norm(2)
    for workers in (1, 2, 5):
        a = sublevel_monte_carlo(ref, PHI22, psi, 8, 50_000, 123, workers)
        b = sublevel_monte_carlo(ref, PHI22, psi, 8, 50_000, 123, workers)
        assert repr(a).encode() == repr(b).encode()
    # the thread cap changes the schedule, not the result
    base = sublevel_monte_carlo(ref, PHI22, psi, 8, 50_000, 123, 4)
    monkeypatch.setenv("PLURIVAL_THREADS", "1")
    assert repr(sublevel_monte_carlo(ref, PHI22, psi, 8, 50_000, 123, 4)) == repr(base)


def test_closed_form_vs_monte_carlo_fifty_fixtures():
    rng = random.Random(2024)
    worst = 0.0
    for k in range(50):
        n = rng.randint(1, 3)
        gamma = tuple(rng.randint(0, 2) for _ in range(n))
        ref = ReferencePair.monomial(gamma)
        w = [rng.randint(1, 5) for _ in range(n)]
        phi = DiagonalZhouWeight(tuple(F(sum(w), x) for x in w))
        beta = tuple(rng.randint(0, 2) for _ in range(n))
        if not any(beta):
            beta = (1,) * n
        psi = ToricWeight.monomial(beta)
        t = rng.choice([2, 4, 8])
        cf = sublevel_closed_form(ref, phi, psi, t)
        mc = sublevel_monte_carlo(ref, phi, psi, t, 100_000, seed=k)
        z = abs(mc.ratio - cf.ratio) / mc.stderr
        worst = max(worst, z)
    assert worst <= 3


def test_ratio_convergence_examples():
    s = ratio_convergence(Z1, PHI22)
    assert s.exact_limit == F(1, 2) and s.ok
    assert ratio_convergence(ToricWeight.monomial((1, 1)), PHI22).exact_limit == 1
    phi = DiagonalZhouWeight((3, F(3, 2)))
    s = ratio_convergence(phi.toric, phi)
    assert s.exact_limit == 1 and s.ok


def test_ratio_convergence_axis_pieces_fit():
    s = ratio_convergence(ToricWeight(((2, 0), (0, 1))), PHI22, t_grid=(4, 8, 16, 32, 64))
    assert s.exact_limit is None
    assert s.ok and abs(s.limit - float(s.sigma)) <= 1e-6
    lo, hi = s.sandwich
    assert lo <= float(s.sigma) + 1e-9 or hi >= float(s.sigma) - 1e-9


def test_ratio_convergence_monte_carlo():
    ref = ReferencePair.monomial((1, 1), ToricWeight.log_norm(2))
    s = ratio_convergence(Z1, PHI22, ref, t_grid=(4, 8, 16), n_samples=200_000, seed=5)
    assert s.ok


def test_mass_normalized_examples():
    rep = mass_asymptotics(TRIV2, PHI22)
    assert rep.normalized and rep.ok and rep.scaled_constant == F(1, 4)
    assert all(x == pytest.approx(0.25, rel=1e-12) for x in rep.scaled)
    ref = ReferencePair.monomial((1, 0))
    rep = mass_asymptotics(ref, DiagonalZhouWeight((2, 2), F(3, 2)))
    assert rep.limit == 1 and rep.ok
    assert abs(rep.log_rates[-1] - 1) < 0.05 and abs(rep.extrapolated - 1) <= 1e-6


def test_mass_super_singular_weight_blows_up():
    rep = mass_asymptotics(TRIV2, DiagonalZhouWeight((2, 2), F(10, 9)))
    assert not rep.normalized and rep.threshold == F(9, 10)
    assert all(x < y for x, y in zip(rep.scaled, rep.scaled[1:]))
    assert any("grows" in n for n in rep.notes)
    mild = mass_asymptotics(TRIV2, DiagonalZhouWeight((2, 2), F(9, 10)))
    assert mild.scaled[-1] < mild.scaled[0]
