import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from sympy import GF, Poly, symbols

from newton_strata import (DomainError, FFElem, PrecisionExhausted, SeriesMatrix, TruncatedSeries, field_for,
                           finite_field)
from newton_strata.fields import ff_arith
from newton_strata.matrix import elementary, permutation_matrix
from newton_strata.series import ls_arith, ls_frobenius

X = symbols("x")
F2, F4, F5, F9 = finite_field(2), field_for(2, 2), finite_field(5), field_for(3, 2)


def el(F, *coords):
    return FFElem(F, coords)


def test_field_examples():
    assert ff_arith(el(F2, 1), el(F2, 1), "add") == el(F2, 0)
    x = el(F4, 0, 1)
    assert F4.modulus == (1, 1, 1)
    assert ff_arith(x, None, "frob") == el(F4, 1, 1)
    assert ff_arith(x, el(F4, 1, 1), "mul") == el(F4, 1, 0)
    with pytest.raises(DomainError):
        ff_arith(el(F4, 0, 0), None, "inv")


def _sympy_mul(F, a, b):
    mod = Poly(list(reversed(F.modulus)), X, domain=GF(F.p))
    pa = Poly(list(reversed(F.coords(a))), X, domain=GF(F.p))
    pb = Poly(list(reversed(F.coords(b))), X, domain=GF(F.p))
    r = (pa * pb).rem(mod)
    cs = [int(c) % F.p for c in reversed(r.all_coeffs())]
    return F.encode(cs + [0] * (F.e - len(cs)))


@pytest.mark.parametrize("F", [F4, F9, field_for(2, 3), field_for(4, 2)])
def test_field_mul_matches_polynomial_oracle(F):
    rng = np.random.default_rng(1)
    for _ in range(200):
        a, b = (int(x) for x in rng.integers(0, F.size, 2))
        assert F.mul(a, b) == _sympy_mul(F, a, b)
        if a:
            assert F.mul(a, F.inv(a)) == 1


def test_frobenius_order_and_fixed_field():
    F = field_for(2, 4)
    for a in range(F.size):
        assert F.frob(a, F.sigma_order) == a
        assert F.frob(a) == F.pow(a, 2)
        assert F.in_base_field(a) == (F.frob(a) == a)


def test_series_examples():
    z3z5 = TruncatedSeries.from_terms(F2, {3: 1, 5: 1})
    assert ls_arith(z3z5, None, "val") == 3
    inv = ls_arith(TruncatedSeries.from_terms(F2, {0: 1, 1: 1}), None, "inv", window=10)
    assert inv == TruncatedSeries.from_ints(F2, [1] * 10, 0, 10)
    prod = ls_arith(TruncatedSeries.from_terms(F2, {-1: 1, 0: 1}), TruncatedSeries.monomial(F2, 1), "mul")
    assert prod == TruncatedSeries.from_terms(F2, {0: 1, 1: 1})
    assert ls_frobenius(TruncatedSeries.monomial(F2, 3)) == TruncatedSeries.monomial(F2, 3)
    xz = TruncatedSeries.monomial(F4, 1, F4.encode([0, 1]))
    assert ls_frobenius(xz) == TruncatedSeries.monomial(F4, 1, F4.encode([1, 1]))


def test_zero_and_precision_errors():
    with pytest.raises(DomainError):
        TruncatedSeries.zero(F2).valuation()
    with pytest.raises(PrecisionExhausted):
        TruncatedSeries.zero(F2, 5).valuation()
    with pytest.raises(PrecisionExhausted):
        TruncatedSeries.zero(F2, 5).inverse()
    a = TruncatedSeries.from_terms(F2, {0: 1}, prec=4)
    assert (a * TruncatedSeries.monomial(F2, 2)).prec == 6
    assert (a + TruncatedSeries.one(F2)).prec == 4


def test_repr():
    assert repr(TruncatedSeries.from_terms(F2, {0: 1, 1: 1}, prec=8)) == "1 + z + O(z^8)"


def series(F, lo=-3, hi=6, exact=True):
    coef = st.integers(0, F.size - 1)
    return st.tuples(st.integers(lo, hi), st.lists(coef, max_size=6), st.integers(0, 8)).map(
        lambda t: TruncatedSeries.from_ints(F, t[1], t[0], None if exact else t[0] + len(t[1]) + t[2]))


def _naive_mul(a, b):
    F = a.field
    out = {}
    for i, ca in a.terms().items():
        for j, cb in b.terms().items():
            k = i + j
            out[k] = F.add(out.get(k, 0), F.mul(F.encode(ca), F.encode(cb)))
    return TruncatedSeries.from_terms(F, {k: v for k, v in out.items() if v})


@settings(max_examples=100, deadline=None)
@given(st.sampled_from([F2, F4, F5, F9]).flatmap(lambda F: st.tuples(series(F), series(F))))
def test_mul_matches_naive_convolution(ab):
    a, b = ab
    assert a * b == _naive_mul(a, b)


@settings(max_examples=100, deadline=None)
@given(st.sampled_from([F2, F4, F5, F9]).flatmap(lambda F: st.tuples(series(F, exact=False),
                                                                      series(F, exact=False))))
def test_valuation_additive_and_sigma_additive(ab):
    a, b = ab
    assert (a + b).frobenius() == a.frobenius() + b.frobenius()
    if a.is_zero() or b.is_zero():
        return
    ab_ = a * b
    if not ab_.is_zero():
        assert ab_.valuation() == a.valuation() + b.valuation()


@settings(max_examples=100, deadline=None)
@given(st.sampled_from([F2, F4, F5, F9]).flatmap(lambda F: series(F, exact=False)))
def test_inverse_is_two_sided(a):
    if a.is_zero():
        return
    inv = a.inverse(window=12)
    one = TruncatedSeries.one(a.field)
    assert (a * inv).agrees(one)
    assert (inv * a).agrees(one)


@pytest.mark.parametrize("F", [F2, F4, F9])
def test_sigma_has_order_e(F):
    a = TruncatedSeries.from_ints(F, list(range(F.size)), -2)
    assert a.frobenius(F.sigma_order) == a
    assert a.frobenius() == TruncatedSeries.from_ints(F, [F.frob(c) for c in range(F.size)], -2)


def test_embed_commutes_with_arithmetic():
    E = F4.extension(3)
    a = TruncatedSeries.from_ints(F4, [1, 2, 3], -1)
    b = TruncatedSeries.from_ints(F4, [3, 0, 1], 0)
    assert (a * b).embed(E) == a.embed(E) * b.embed(E)
    assert a.frobenius().embed(E) == a.embed(E).frobenius()


# --- matrices -----------------------------------------------------------------


def test_matrix_det_inverse_charpoly():
    m = SeriesMatrix.from_terms(F2, [[{}, {1: 1}], [{0: 1}, {}]])
    assert m.det() == TruncatedSeries.monomial(F2, 1)
    inv = m.inverse()
    assert inv.is_exact and m @ inv == SeriesMatrix.identity(F2, 2)
    a0, a1, a2 = m.charpoly()
    # det(x - m) = x^2 - z over F_2
    assert a0 == TruncatedSeries.one(F2) and a1.is_zero() and a2 == m.det()


def test_elementary_and_permutation_matrices():
    s = TruncatedSeries.monomial(F4, 2, 3)
    E = elementary(F4, 3, 0, 2, s)
    assert E @ elementary(F4, 3, 0, 2, -s) == SeriesMatrix.identity(F4, 3)
    P = permutation_matrix(F4, (1, 2, 0), (0, 0, 1))
    assert P.det().valuation() == 1
    assert P.power(3) == SeriesMatrix.diagonal_monomials(F4, (1, 1, 1))


matrices = st.sampled_from([F2, F4, F5]).flatmap(
    lambda F: st.integers(1, 3).flatmap(
        lambda n: st.lists(st.lists(series(F, -1, 2), min_size=n, max_size=n), min_size=n, max_size=n)
        .map(SeriesMatrix)))


@settings(max_examples=60, deadline=None)
@given(matrices, st.data())
def test_det_multiplicative_and_exterior_power(m, data):
    F, n = m.field, m.n
    other = SeriesMatrix([[data.draw(series(F, -1, 2)) for _ in range(n)] for _ in range(n)])
    assert (m @ other).det() == m.det() * other.det()
    if n >= 2:
        assert (m @ other).exterior_power(2) == m.exterior_power(2) @ other.exterior_power(2)
    assert (m @ other).frobenius() == m.frobenius() @ other.frobenius()
