from fractions import Fraction as F
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st
from sympy import Matrix, Rational

from newton_strata import DomainError, GroupType, build_root_datum, dominant_sort, kottwitz_class, leq_dominance
from newton_strata.rootdatum import deformation_dimension, pairing

GROUPS = ["GL2", "GL3", "GL4", "SL2", "SL3", "Sp4", "Sp6", "SO5", "SO4", "SO6", "SO7", "SO8"]


def test_gl3_and_gl2_data():
    D = build_root_datum("GL3")
    assert D.simple_roots == ((-1, 1, 0), (0, -1, 1))
    assert D.rho == (-1, 0, 1)
    assert build_root_datum("GL2").fundamental_weights[0] == (F(-1, 2), F(1, 2))
    assert build_root_datum("SL2").pi1 == ()


def test_unsupported_groups():
    for bad in ["GL0", "Sp3", "SO2", "E8", "G2"]:
        with pytest.raises(DomainError):
            build_root_datum(bad)


def test_pairing_examples():
    D = build_root_datum("GL3")
    v = (F(1, 2), F(1, 2), 2)
    assert pairing(D, D.simple_roots[0], v) == 0
    assert pairing(D, D.simple_roots[1], v) == F(3, 2)
    assert pairing(D, D.rho, (F(-1, 2), F(1, 2), 0)) == F(1, 2)
    with pytest.raises(DomainError):
        pairing(D, D.rho, (1, 2))


def test_sort_dominance_kappa_examples():
    D3, Sp4 = build_root_datum("GL3"), build_root_datum("Sp4")
    assert dominant_sort(D3, (2, 0, 1)) == (0, 1, 2)
    assert dominant_sort(D3, (1, 1, 1)) == (1, 1, 1)
    assert dominant_sort(Sp4, (-1, 2)) == (1, 2)
    assert leq_dominance(D3, (1, 1, 1), (0, 1, 2))
    assert not leq_dominance(D3, (F(1, 3), F(1, 3), F(7, 3)), (0, 1, 2))
    with pytest.raises(DomainError):
        leq_dominance(D3, (2, 1, 0), (0, 1, 2))
    assert kottwitz_class(D3, (0, 1, 2)) == kottwitz_class(D3, (1, 1, 1)) == (3,)
    assert deformation_dimension(D3, (0, 1, 2)) == 4
    assert deformation_dimension(D3, (2, 2, 2)) == 0
    assert deformation_dimension(build_root_datum("GL2"), (0, 1)) == 1


def test_fundamental_group_table():
    table = {"GL3": "Z", "SL3": 1, "Sp4": 1, "Sp6": 1, "SO5": 2, "SO7": 2, "SO4": 2, "SO6": 2, "SO8": 2}
    for g, order in table.items():
        D = build_root_datum(g)
        if order == "Z":
            assert D.kappa((1, 0, 0)) == (1,)
        elif order == 1:
            v = [1] + [0] * (D.dim - 1)
            if g.startswith("SL"):
                v[1] = -1
            assert D.kappa(tuple(v)) == ()
        else:
            e1 = tuple([1] + [0] * (D.dim - 1))
            assert D.kappa(e1) != D.kappa(tuple([0] * D.dim))
            assert D.kappa(tuple(2 * x for x in e1)) == D.kappa(tuple([0] * D.dim))


def test_group_type_parse():
    assert GroupType.parse("Sp4").name == "Sp4" and GroupType.parse("so5").name == "SO5"


# --- properties ---------------------------------------------------------------


def _reflect(D, v, i):
    a, c = D.simple_roots[i], D.simple_coroots[i]
    s = sum(F(x) * y for x, y in zip(a, v))
    return tuple(F(x) - s * y for x, y in zip(v, c))


def _orbit(D, v):
    seen = {tuple(F(x) for x in v)}
    todo = list(seen)
    while todo:
        x = todo.pop()
        for i in range(D.rank):
            y = _reflect(D, x, i)
            if y not in seen:
                seen.add(y)
                todo.append(y)
    return seen


def _cone_solver(D, a, b):
    """b - a as a combination of simple coroots, solved exactly; None if outside the span."""
    C = Matrix([[Rational(x) for x in c] for c in D.simple_coroots]).T
    d = Matrix([Rational(F(y) - F(x)) for x, y in zip(a, b)])
    try:
        sol, params = C.gauss_jordan_solve(d)
    except ValueError:
        return None
    return [F(int(s.p), int(s.q)) for s in sol]


def vectors(D, lo=-2, hi=2):
    return st.lists(st.fractions(lo, hi, max_denominator=3), min_size=D.dim, max_size=D.dim)


@settings(max_examples=80, deadline=None)
@given(st.sampled_from(["GL3", "SL3", "Sp4", "SO5", "SO4", "SO6", "GL4"]).flatmap(
    lambda g: st.tuples(st.just(g), vectors(build_root_datum(g)))))
def test_dominant_sort_is_dominant_and_in_orbit(data):
    g, v = data
    D = build_root_datum(g)
    if g == "SL3":
        v = [x - sum(v) / 3 for x in v]
    d = D.dominant_sort(v)
    assert all(pairing(D, a, d) >= 0 for a in D.simple_roots)
    assert tuple(F(x) for x in d) in _orbit(D, v)


@settings(max_examples=80, deadline=None)
@given(st.sampled_from(["GL3", "Sp4", "SO5", "SO4", "SO6"]).flatmap(
    lambda g: st.tuples(st.just(g), vectors(build_root_datum(g)), vectors(build_root_datum(g)),
                        vectors(build_root_datum(g)))))
def test_dominance_is_a_partial_order_matching_cone_solver(data):
    g, *vs = data
    D = build_root_datum(g)
    a, b, c = (D.dominant_sort(v) for v in vs)
    for x, y in [(a, b), (b, a), (a, c), (b, c)]:
        sol = _cone_solver(D, x, y)
        assert D.leq_dominance(x, y) == (sol is not None and all(s >= 0 for s in sol))
    assert D.leq_dominance(a, a)
    if D.leq_dominance(a, b) and D.leq_dominance(b, a):
        assert a == b
    if D.leq_dominance(a, b) and D.leq_dominance(b, c):
        assert D.leq_dominance(a, c)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(GROUPS).flatmap(
    lambda g: st.tuples(st.just(g),
                        st.lists(st.integers(-3, 3), min_size=build_root_datum(g).dim,
                                 max_size=build_root_datum(g).dim),
                        st.lists(st.integers(-3, 3), min_size=build_root_datum(g).dim,
                                 max_size=build_root_datum(g).dim))))
def test_kappa_is_additive_and_kills_coroots(data):
    g, a, b = data
    D = build_root_datum(g)
    if g.startswith("SL"):
        a[-1] -= sum(a)
        b[-1] -= sum(b)
    ka, kb = D.kappa_rational(a), D.kappa_rational(b)
    kab = D.kappa_rational([x + y for x, y in zip(a, b)])
    rep_b = D.kappa_representative(D.kappa(tuple(b)))
    assert D.kappa(tuple(x + y for x, y in zip(a, b))) == D.kappa(tuple(x + y for x, y in zip(a, rep_b)))
    assert kab == tuple(x + y for x, y in zip(ka, kb))
    for c in D.simple_coroots:
        assert D.kappa(tuple(x + y for x, y in zip(a, c))) == D.kappa(tuple(a))


def test_small_dominance_sets_exhaustive():
    D = build_root_datum("Sp4")
    pts = {D.dominant_sort((F(x, 2), F(y, 2))) for x, y in product(range(-4, 5), repeat=2)}
    for a in pts:
        for b in pts:
            sol = _cone_solver(D, a, b)
            assert D.leq_dominance(a, b) == (sol is not None and min(sol) >= 0)
