import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import linprog

from plurival import CapacityError, LinearProgram, MonomialIdeal, NewtonPolyhedron, ValidationError, lp_solve
from plurival.lattice import minimal_elements, newton_contains

F = Fraction


def test_lp_two_axis_vertex():
    p = LinearProgram((1, 1), (((2, 0), 1), ((0, 3), 1)))
    res = lp_solve(p)
    assert res.status == "optimal"
    assert res.value == F(5, 6)
    assert res.x == (F(1, 2), F(1, 3))


def test_lp_orthant_boundary():
    res = lp_solve(LinearProgram((1,)))
    assert res.value == 0 and res.x == (0,)


def test_lp_unbounded_with_ray():
    res = lp_solve(LinearProgram((1,), (((1,), 1),), "max"))
    assert res.status == "unbounded"
    assert res.certificate[0] > 0


def test_lp_infeasible_farkas():
    # u1 >= 1 and -u1 >= 0
    p = LinearProgram((1,), (((1,), 1), ((-1,), 0)))
    res = lp_solve(p)
    assert res.status == "infeasible"
    y = res.certificate
    assert all(v >= 0 for v in y)
    assert sum(yi * row[0] for yi, (row, _) in zip(y, p.constraints)) <= 0
    assert sum(yi * b for yi, (_, b) in zip(y, p.constraints)) > 0


def test_lp_errors():
    with pytest.raises(ValidationError):
        LinearProgram((1, 1), (((1,), 1),))
    with pytest.raises(CapacityError):
        lp_solve(LinearProgram((1,) * 17))


@st.composite
def feasible_programs(draw):
    n = draw(st.integers(1, 4))
    m = draw(st.integers(1, 4))
    cost = tuple(draw(st.integers(0, 5)) for _ in range(n))
    rows = []
    for _ in range(m):
        row = tuple(draw(st.integers(-2, 4)) for _ in range(n))
        rows.append((row, F(draw(st.integers(-3, 6)), draw(st.integers(1, 3)))))
    return LinearProgram(cost, tuple(rows))


@given(feasible_programs())
def test_lp_matches_scipy(p):
    res = lp_solve(p)
    A = np.array([[-float(c) for c in row] for row, _ in p.constraints])
    b = np.array([-float(bound) for _, bound in p.constraints])
    ref = linprog([float(c) for c in p.objective], A_ub=A, b_ub=b, bounds=[(0, None)] * p.dim, method="highs")
    if ref.status == 2:
        assert res.status == "infeasible"
    elif ref.status == 3:
        assert res.status == "unbounded"
    else:
        assert res.status == "optimal"
        assert abs(float(res.value) - ref.fun) < 1e-7


@given(feasible_programs())
def test_strong_duality(p):
    res = lp_solve(p)
    if res.status != "optimal":
        return
    dual = lp_solve(p.dual())
    assert dual.status == "optimal"
    assert dual.value == res.value
    # complementary data: the returned multipliers are dual feasible
    y = res.dual
    assert all(v >= 0 for v in y)
    for j in range(p.dim):
        assert sum(y[i] * p.constraints[i][0][j] for i in range(len(y))) <= p.objective[j]


def test_newton_examples():
    N = NewtonPolyhedron(2, ((2, 0), (0, 3)))
    assert newton_contains(N, (1, 2))
    assert newton_contains(NewtonPolyhedron(2, ((1, 0),)), (1, 0))
    assert not newton_contains(N, (0, 0))


def _scipy_contains(gens, beta):
    k = len(gens)
    A_ub = np.array([[float(g[j]) for g in gens] for j in range(len(beta))])
    res = linprog(
        np.zeros(k),
        A_ub=A_ub,
        b_ub=[float(b) for b in beta],
        A_eq=np.ones((1, k)),
        b_eq=[1.0],
        bounds=[(0, None)] * k,
        method="highs",
    )
    return res.status == 0


@given(st.integers(2, 3).flatmap(lambda n: st.tuples(
    st.lists(st.tuples(*[st.integers(0, 5)] * n), min_size=1, max_size=5),
    st.tuples(*[st.integers(0, 6)] * n),
)))
def test_newton_membership_primal_dual_scipy(data):
    gens, beta = data
    N = NewtonPolyhedron(len(beta), tuple(gens))
    primal = N.contains(beta, "primal")
    assert primal == N.contains(beta, "dual")
    # avoid boundary ties for the float oracle: shrink beta slightly off the facets
    if primal == _scipy_contains(gens, beta):
        return
    slack = [b + 1e-6 for b in beta]
    assert primal == _scipy_contains(gens, slack)


@given(st.integers(1, 3).flatmap(lambda n: st.lists(st.tuples(*[st.integers(0, 5)] * n), min_size=1, max_size=6)))
def test_vertices_brute_force(gens):
    N = NewtonPolyhedron(len(gens[0]), tuple(gens))
    verts = set(N.vertices)
    # a generator is a vertex iff it is not in the polyhedron of the other generators
    for g in set(gens):
        others = [h for h in set(gens) if h != g]
        inside = bool(others) and NewtonPolyhedron(len(g), tuple(others)).contains(g)
        assert (tuple(F(c) for c in g) in verts) == (not inside)
    # the vertices span the same polyhedron
    assert NewtonPolyhedron(N.dim, tuple(verts)) == N


def test_minimal_elements_brute_force():
    pts = list(itertools.product(range(3), repeat=2))
    pts = [p for p in pts if sum(p) >= 2]
    assert minimal_elements(pts) == ((0, 2), (1, 1), (2, 0))


def test_monomial_ideal_basics():
    I = MonomialIdeal(2, ((2, 0), (1, 1), (2, 3)))
    assert I.generators == ((1, 1), (2, 0))
    assert I.contains((3, 1)) and not I.contains((0, 5))
    assert MonomialIdeal.maximal(2).contains((0, 1))
    assert MonomialIdeal.from_json(I.to_json()) == I
    assert I.issubset(MonomialIdeal.maximal(2))
    with pytest.raises(ValidationError):
        MonomialIdeal(2, ((F(1, 2), 0),))
    with pytest.raises(ValidationError):
        MonomialIdeal(2, ((-1, 0),))
    # (1,1) is in the integral closure of (z1^2, z2^2) but not in the ideal
    J = MonomialIdeal(2, ((2, 0), (0, 2)))
    assert J.integral_closure_contains((1, 1)) and not J.contains((1, 1))
