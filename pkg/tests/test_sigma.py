from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from newton_strata import (CertificationFailed, DomainError, NoConvergence, PrecisionExhausted, SeriesMatrix,
                           TruncatedSeries, build_root_datum, effective_isogeny, enumerate_poset, field_for,
                           finite_field, hn_filtration, hn_normalize, hodge_point, kottwitz_point, lang_normalize,
                           make_newton_point, newton_point, sigma_conj_solve, sigma_conjugate, weyl_representative)
from newton_strata.explorer import SampleConfig, random_integral_unit, sample_double_coset, sample_rng
from newton_strata.matrix import elementary
from newton_strata.series import Precision
from newton_strata.sigma import (ExtendedWeylElem, central_twist, exterior_power, gl_hodge_point,
                                 newton_estimate)

F2, F4 = finite_field(2), field_for(2, 2)


def mat(F, rows, prec=None):
    return SeriesMatrix.from_terms(F, rows, prec)


PI2 = mat(F2, [[{}, {1: 1}], [{0: 1}, {}]])


def hodge_oracle(b, max_k=None):
    """Elementary divisors from gcd valuations of k x k minors."""
    n = b.n
    out, prev = [], 0
    for k in range(1, n + 1):
        v = min(x.valuation() for r in b.exterior_power(k).entries for x in r if not x.is_zero())
        out.append(v - prev)
        prev = v
    return tuple(out)


def test_hodge_examples():
    assert hodge_point(mat(F2, [[{2: 1}, {}], [{}, {0: 1}]])) == (0, 2)
    assert hodge_point(PI2) == (0, 1)
    u = elementary(F2, 2, 0, 1, TruncatedSeries.from_terms(F2, {0: 1, 3: 1}))
    assert hodge_point(u) == (0, 0)


def test_kottwitz_examples():
    assert kottwitz_point(mat(F2, [[{2: 1}, {}], [{}, {0: 1}]])) == (2,)
    assert kottwitz_point(PI2) == (1,)


def test_newton_examples():
    assert newton_point(PI2).point == (F(1, 2), F(1, 2))
    assert newton_point(mat(F2, [[{3: 1}, {}], [{}, {-1: 1}]])).point == (-1, 3)
    tri = mat(F2, [[{1: 1}, {0: 1}], [{}, {2: 1}]])
    assert newton_point(tri).point == (1, 2)


def test_newton_estimate_is_only_a_lower_oracle():
    tri = mat(F2, [[{1: 1}, {0: 1}], [{}, {2: 1}]])
    est = newton_estimate(tri, 8)
    assert est != (1, 2) and sum(est) == 3


def test_newton_over_extension_field():
    b = SeriesMatrix.from_terms(F4, [[{}, {1: F4.encode([0, 1])}], [{0: 1}, {}]])
    assert newton_point(b).point == (F(1, 2), F(1, 2))


def test_uncertifiable_precision_reports_estimate():
    b = mat(F2, [[{1: 1}, {}], [{}, {}]], prec=2)
    with pytest.raises((CertificationFailed, PrecisionExhausted)):
        newton_point(b)


def test_weyl_representative_examples():
    GL2, GL3 = build_root_datum("GL2"), build_root_datum("GL3")
    rep = weyl_representative(make_newton_point(GL2, (F(1, 2), F(1, 2))))
    assert rep == ExtendedWeylElem.cycle(2)
    assert rep.to_matrix(F2) == PI2.scale(TruncatedSeries.one(F2)) or rep.to_matrix(F2).det().valuation() == 1
    rep3 = weyl_representative(make_newton_point(GL3, (F(1, 2), F(1, 2), 2)))
    assert rep3 == ExtendedWeylElem.cycle(2).direct_sum(ExtendedWeylElem.translation((2,)))
    assert weyl_representative(make_newton_point(GL3, (0, 1, 2))) == ExtendedWeylElem.translation((0, 1, 2))
    with pytest.raises(DomainError):
        weyl_representative(make_newton_point(build_root_datum("Sp4"), (1, 2)))


@pytest.mark.parametrize("mu", [(0, 1), (0, 0, 3), (0, 1, 2), (0, 1, 2, 3), (0, 0, 3, 3), (0, 2, 2, 3)])
def test_newton_of_weyl_representative(mu):
    D = build_root_datum(f"GL{len(mu)}")
    for v in enumerate_poset(D, mu):
        assert newton_point(weyl_representative(v).to_matrix(F2)) == v


def test_exterior_power_and_twist():
    d = SeriesMatrix.diagonal_monomials(F2, (1, 2, 3))
    assert exterior_power(d, 2) == SeriesMatrix.diagonal_monomials(F2, (3, 4, 5))
    w = exterior_power(PI2, 1 + 1)
    assert w.n == 1 and w[0, 0].valuation() == 1
    assert hodge_point(central_twist(SeriesMatrix.diagonal_monomials(F2, (1, 1)), 1)) == (0, 0)
    assert newton_point(central_twist(PI2 @ PI2, 1)).point == (0, 0)


def test_effective_isogeny_examples():
    b = mat(F2, [[{}, {2: 1}], [{-1: 1}, {}]])
    g, beff = effective_isogeny(b)
    assert g == SeriesMatrix.diagonal_monomials(F2, (0, -1))
    assert beff == PI2
    g, beff = effective_isogeny(PI2)
    assert g == SeriesMatrix.identity(F2, 2) and beff == PI2
    with pytest.raises(DomainError):
        effective_isogeny(SeriesMatrix.diagonal_monomials(F2, (-1, 1)))


def test_effective_isogeny_on_conjugated_pi2():
    rng = np.random.default_rng(3)
    for _ in range(10):
        k = random_integral_unit(F4, 2, 3, rng)
        g0 = SeriesMatrix.diagonal_monomials(F4, (0, -int(rng.integers(1, 3))))
        b = sigma_conjugate(PI2.embed(F4), g0 @ k)
        g, beff = effective_isogeny(b)
        assert beff.is_integral()
        assert newton_point(beff) == newton_point(b)
        assert kottwitz_point(beff) == kottwitz_point(b)
        assert min(gl_hodge_point(beff)) >= 0


def test_hn_examples():
    h = hn_filtration(mat(F2, [[{0: 1}, {}], [{}, {1: 1}]]))
    assert h.generator[0] == TruncatedSeries.one(F2) and h.generator[1].is_zero()
    assert newton_point(h.quotient).point == (1,)
    c = TruncatedSeries.from_terms(F2, {0: 1, 2: 1})
    h = hn_filtration(SeriesMatrix([[TruncatedSeries.one(F2), c], [TruncatedSeries.zero(F2),
                                                                     TruncatedSeries.monomial(F2, 1)]]))
    assert h.generator[1].is_zero()
    h = hn_filtration(mat(F2, [[{0: 1}, {}], [{0: 1}, {1: 1}]]))
    assert h.generator[1].truncate(16) == TruncatedSeries.from_ints(F2, [1] * 16, 0, 16)
    assert h.sub_unit.valuation() == 0
    assert newton_point(h.quotient).point == (1,)
    with pytest.raises(DomainError):
        hn_filtration(PI2)


def test_hn_normalize():
    one, zero = TruncatedSeries.one(F2), TruncatedSeries.zero(F2)
    b = SeriesMatrix([[one, zero], [zero, TruncatedSeries.monomial(F2, 1)]])
    h, bM, bN = hn_normalize(b, 6)
    assert h == SeriesMatrix.identity(F2, 2)
    u = TruncatedSeries.from_terms(F2, {1: 1, 2: 1})
    b = SeriesMatrix([[TruncatedSeries.from_terms(F2, {0: 1, 1: 1}), u], [zero, TruncatedSeries.monomial(F2, 1)]])
    h, bM, bN = hn_normalize(b, 8)
    assert (bM @ bN).agrees(sigma_conjugate(b, h))
    assert all(x.val_lower_bound() >= 8 for x in (bN - SeriesMatrix.identity(F2, 2)).entries[0][1:])
    with pytest.raises(PrecisionExhausted):
        hn_normalize(b, 5000, Precision(max_window=64))


def test_sigma_conj_solve_examples():
    assert sigma_conj_solve(PI2, PI2, 4) == SeriesMatrix.identity(F2, 2)
    E = mat(F2, [[{}, {20: 1}], [{}, {}]])
    b2 = PI2 @ (SeriesMatrix.identity(F2, 2) + E)
    g = sigma_conj_solve(PI2, b2, 20)
    T = 20 + 1 + 2 * (1 + 2)
    lhs = PI2.embed(g.field) @ g.frobenius() - g @ b2.embed(g.field)
    assert all(x.val_lower_bound() >= T for r in lhs.entries for x in r)


def test_sigma_conj_solve_never_wrong_below_threshold():
    cfg = SampleConfig((0, 1), q=2, seed=11)
    for i in range(6):
        rng = sample_rng(5, i)
        b = sample_double_coset(cfg, rng)
        E = SeriesMatrix([[TruncatedSeries.monomial(b.field, int(rng.integers(0, 2)), int(rng.integers(0, 2)))
                           for _ in range(2)] for _ in range(2)])
        b2 = b + E
        try:
            g = sigma_conj_solve(b, b2, 0)
        except NoConvergence:
            continue
        be, b2e = b.embed(g.field), b2.embed(g.field)
        T = sigma_conj_default_window(b, 0)
        assert all(x.val_lower_bound() >= T for r in (be @ g.frobenius() - g @ b2e).entries for x in r)


def sigma_conj_default_window(b, d):
    from newton_strata.sigma import default_conjugation_window
    return default_conjugation_window(b, d)


def test_lang_normalize():
    u = TruncatedSeries.from_terms(F4, {0: F4.encode([0, 1]), 2: 1})
    g = lang_normalize(u, 6)
    lhs = (g.inverse(6) * u.embed(g.field) * g.frobenius()).truncate(6)
    assert lhs.agrees(TruncatedSeries.one(g.field))


def test_sigma_conjugate_identity():
    assert sigma_conjugate(PI2, SeriesMatrix.identity(F2, 2)) == PI2


# --- properties ---------------------------------------------------------------


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([(0, 1), (0, 0, 1), (0, 1, 2), (-1, 1)]), st.integers(0, 10 ** 6), st.sampled_from([2, 3]))
def test_sample_invariants(mu, seed, q):
    cfg = SampleConfig(mu, q=q, seed=seed, depth=6)
    rng = sample_rng(seed, 0)
    b = sample_double_coset(cfg, rng)
    assert gl_hodge_point(b) == hodge_oracle(b)
    nu = newton_point(b)
    D = nu.datum
    assert D.leq_dominance(nu.point, D.dominant_sort(gl_hodge_point(b)))
    k = random_integral_unit(b.field, b.n, 3, rng)
    k = k @ SeriesMatrix.diagonal_monomials(b.field, tuple(int(x) for x in rng.integers(-1, 2, b.n)))
    assert kottwitz_point(sigma_conjugate(b, k, window=40)) == kottwitz_point(b)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([(0, 1, 2), (0, 0, 2), (0, 1, 3)]), st.integers(0, 10 ** 6), st.integers(1, 2))
def test_exterior_power_slope_law(mu, seed, m):
    b = sample_double_coset(SampleConfig(mu, seed=seed, depth=5), sample_rng(seed, 1))
    nu = newton_point(b).point
    wedge = newton_point(exterior_power(b, m)).point
    sums = sorted(sum(c) for c in __import__("itertools").combinations(nu, m))
    assert list(wedge) == sums
