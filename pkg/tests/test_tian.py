from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import linprog

from conftest import directions, exponents, toric_pieces
from plurival import (
    DiagonalZhouWeight,
    DomainError,
    PreconditionError,
    ReferencePair,
    ToricWeight,
    ValidationError,
    derivative_at_zero,
    relative_type,
    threshold_b0,
    tian_function,
    zhou_weight_for,
)
from plurival.tian import TianFunctionPL

F = Fraction
PHI22 = DiagonalZhouWeight((2, 2))


def scipy_tn(weight, psi, gamma, t):
    """min over {depth(weight) >= 1} of <gamma+1, u> + t depth_psi(u)."""
    n = weight.dim
    P = np.array([[float(c) for c in p] for p in weight.folded])
    base = np.array([g + 1.0 for g in gamma])
    B = [np.array([float(c) for c in b]) for b in psi.folded]
    if t >= 0:
        vals = []
        for b in B:
            res = linprog(base + float(t) * b, A_ub=-P, b_ub=-np.ones(len(P)), bounds=[(0, None)] * n, method="highs")
            vals.append(res.fun)
        return min(vals)
    # convex case: epigraph variable z >= <base - |t| b, u>
    c = np.zeros(n + 1)
    c[-1] = 1
    rows = [np.concatenate([-p, [0.0]]) for p in P]
    rhs = [-1.0] * len(P)
    for b in B:
        rows.append(np.concatenate([base + float(t) * b, [-1.0]]))
        rhs.append(0.0)
    res = linprog(c, A_ub=np.array(rows), b_ub=rhs, bounds=[(0, None)] * n + [(None, None)], method="highs")
    return res.fun


def test_linear_tian_example():
    T = tian_function(PHI22, f=(1, 0), t_range=(0, 4))
    assert T.breakpoints == ()
    assert all(T(t) == 1 + t / 2 for t in (0, F(1, 3), 2, 4))


def test_tn_zero_is_one_for_diagonal_weights():
    for a in [(2, 2), (3, F(3, 2)), (3, 3, 3)]:
        phi = DiagonalZhouWeight(a)
        T = tian_function(phi, f=(1,) + (0,) * (len(a) - 1), t_range=(F(-1, 2), 4))
        assert T.value_at_0 == 1


def test_non_zhou_weight_tian():
    w = ToricWeight(((2, 0), (0, 3)))
    T = tian_function(w, psi=ToricWeight.monomial((1, 0)), t_range=(F(-1, 2), 4))
    assert T.value_at_0 == F(5, 6)
    assert T.is_concave()
    assert derivative_at_zero(T, "right") == F(1, 2)


def test_derivative_examples():
    T = tian_function(PHI22, psi=ToricWeight.monomial((1, 0)), t_range=(F(-1, 2), 4))
    assert derivative_at_zero(T, "left") == derivative_at_zero(T, "right") == F(1, 2)
    assert derivative_at_zero(TianFunctionPL((F(-1), F(4)), (F(1, 2), F(3))), "left") == F(1, 2)
    with pytest.raises(ValidationError):
        derivative_at_zero(tian_function(PHI22, f=(1, 0), t_range=(0, 1)))


def test_kinked_tian():
    w = ToricWeight(((3, 0), (0, 3), (1, 1)))
    T = tian_function(w, psi=ToricWeight.monomial((0, 1)), t_range=(F(-1, 2), 4))
    left, right = derivative_at_zero(T, "left"), derivative_at_zero(T, "right")
    assert (left, right) == (F(2, 3), F(1, 3))
    assert T.is_concave()


def test_max_weight_fixture_is_linear_at_zero():
    w = ToricWeight(((1, 0), (0, 2)))
    T = tian_function(w, psi=ToricWeight.monomial((0, 1)), t_range=(F(-1, 4), 4))
    assert derivative_at_zero(T, "left") >= derivative_at_zero(T, "right")


def test_domain_error_names_t():
    with pytest.raises(DomainError, match="t=-4"):
        tian_function(PHI22, psi=ToricWeight.monomial((1, 0)), t_range=(-4, 1))


@given(st.integers(1, 3).flatmap(lambda n: st.tuples(toric_pieces(n, positive=True), toric_pieces(n, positive=True), exponents(n, 2))))
def test_tian_matches_scipy_and_is_concave(data):
    wp, pp, extra = data
    weight, psi = ToricWeight(wp), ToricWeight(pp)
    # gamma dominates one psi piece, so the reference stays integrable at t = -1
    beta = psi.folded[0]
    gamma = tuple(int(b) + 1 + e for b, e in zip(beta, extra))
    ref = ReferencePair.monomial(gamma)
    T = tian_function(weight, psi=psi, ref=ref, t_range=(-1, 3))
    assert T.is_concave()
    for t in (F(-1), F(-1, 3), F(0), F(1, 2), F(2), F(3)):
        assert abs(float(T(t)) - scipy_tn(weight, psi, gamma, t)) < 1e-7


@given(st.integers(2, 3).flatmap(lambda n: st.tuples(directions(n), exponents(n, 2), toric_pieces(n, positive=True))))
def test_linearity_against_zhou_weights(data):
    a, gamma, pp = data
    psi = ToricWeight(pp)
    ref = ReferencePair.monomial(gamma)
    phi = zhou_weight_for(ref, a)
    T = tian_function(phi, psi=psi, ref=ref, t_range=(0, 4))
    sigma = relative_type(psi, phi)
    assert T.value_at_0 == 1
    assert all(T(t) == 1 + sigma * t for t in list(T.knots) + [F(7, 3)])


def test_threshold_b0_examples():
    rep = threshold_b0(PHI22, ToricWeight.monomial((1, 0)))
    assert rep.b0 == F(1, 2) and rep.ok
    b, thr, non_int = rep.table[0]
    assert b == F(1, 2) and thr == 1 and non_int
    b, thr, non_int = rep.table[-1]
    assert b == F(1, 2) + F(1, 1000) and thr > 1 and not non_int
    assert threshold_b0(PHI22.toric, PHI22.toric).b0 == 1
    assert threshold_b0(DiagonalZhouWeight((3, F(3, 2))), ToricWeight.monomial((0, 1))).b0 == F(2, 3)


def test_threshold_b0_precondition():
    with pytest.raises(PreconditionError):
        threshold_b0(PHI22, ToricWeight.zero(2))
