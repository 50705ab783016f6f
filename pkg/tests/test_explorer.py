from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from newton_strata import (DomainError, SeriesMatrix, TruncatedSeries, build_root_datum, enumerate_poset,
                           finite_field, make_newton_point, newton_point)
from newton_strata.explorer import (SampleConfig, chain_realization, corridor_ok, find_witness, monomial_witness,
                                    pencil_generic_newton, realize_step, sample_double_coset, sample_rng,
                                    stratum_census)
from newton_strata.sigma import gl_hodge_point

GL2, GL3 = build_root_datum("GL2"), build_root_datum("GL3")


@pytest.mark.parametrize("mu", [(0, 1), (0, 0, 1), (0, 1, 2), (0, 0, 3), (0, 0, 2, 2), (0, 1, 2, 3)])
def test_every_stratum_has_a_witness(mu):
    D = build_root_datum(f"GL{len(mu)}")
    for v in enumerate_poset(D, mu):
        w = find_witness(v, mu, SampleConfig(mu, seed=4))
        assert w.status == "found"
        assert newton_point(w.matrix) == v
        assert gl_hodge_point(w.matrix) == mu


def test_witness_impossible_and_not_found():
    v = make_newton_point(GL3, (1, 1, 1))
    assert find_witness(v, (0, 0, 2)).status == "impossible_by_mazur"
    v = make_newton_point(GL3, (F(2, 3), F(2, 3), F(2, 3)))
    assert monomial_witness(v, (0, 0, 2)) is not None
    cfg = SampleConfig((0, 0, 2), budget=0)
    assert find_witness(v, (0, 0, 2), cfg).status == "found"


def test_census_is_deterministic_and_honest():
    cfg = SampleConfig((0, 1), q=2, samples=200, seed=9)
    a, b = stratum_census(cfg), stratum_census(cfg)
    assert a.deterministic_part() == b.deterministic_part()
    assert a.mazur_violations == 0 and a.non_newton == 0 and a.uncertified == 0
    assert sum(a.counts.values()) == 200
    doc = a.to_json()
    assert all("." not in s["frequency"] for s in doc["strata"])


def test_census_mu1_union():
    cfg = SampleConfig((0, 2), q=2, samples=60, seed=1, mu1=(1, 1))
    rep = stratum_census(cfg)
    assert rep.mazur_violations == 0 and rep.total == 60
    with pytest.raises(DomainError):
        stratum_census(SampleConfig((0, 2), samples=5, mu1=(3, 3)))


def test_corridor_rule():
    assert corridor_ok(F(1, 4), 2, 2)
    assert corridor_ok(F(1, 4), 2, 1) and not corridor_ok(F(1, 8), 2, 1)
    assert not corridor_ok(F(1, 64), 2, 1)
    assert not corridor_ok(F(0), 2, 0)


def test_pencil_generic_point_gl2():
    F2 = finite_field(2)
    base = SeriesMatrix.diagonal_monomials(F2, (0, 1))
    direction = SeriesMatrix.from_terms(F2, [[{}, {}], [{0: 1}, {}]])
    res = pencil_generic_newton(base, direction)
    assert res.special.point == (F(0), F(1))
    # t e_21 does not change anything: b + t d is lower triangular with the same diagonal
    assert res.generic.point == (0, 1) and res.violations == 0
    direction = SeriesMatrix.from_terms(F2, [[{}, {1: 1}], [{0: 1}, {}]])
    base = SeriesMatrix.diagonal_monomials(F2, (1, 1))
    # det = z^2 - t^2 z drops valuation away from t = 0
    with pytest.raises(DomainError):
        pencil_generic_newton(base, direction)
    res = pencil_generic_newton(base, SeriesMatrix.zero(F2, 2))
    assert res.generic == res.special and res.violations == 0


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([(0, 1), (0, 0, 1), (0, 1, 2), (0, 0, 2)]), st.integers(0, 10 ** 6))
def test_pencil_semicontinuity(mu, seed):
    cfg = SampleConfig(mu, seed=seed, depth=4)
    rng = sample_rng(seed, 7)
    b = sample_double_coset(cfg, rng)
    n = len(mu)
    # b (1 + t N) with N nilpotent keeps det(b(t)) = det(b)
    upper = bool(rng.integers(2))
    N = SeriesMatrix([[TruncatedSeries.monomial(b.field, int(rng.integers(-1, 2)), int(rng.integers(0, 2)))
                       if (i < j if upper else i > j) else TruncatedSeries.zero(b.field)
                       for j in range(n)] for i in range(n)])
    res = pencil_generic_newton(b, b @ N, cfg, per_degree=1)
    assert res.anomaly is None
    assert res.violations == 0
    D = res.generic.datum
    assert all(D.leq_dominance(s[2].point, res.generic.point) for s in res.samples)


def test_gl2_step_and_gl3_step():
    mu = (0, 1)
    P = enumerate_poset(GL2, mu)
    step = realize_step(P.bottom, P.top_point, mu, SampleConfig(mu, seed=1))
    assert step.success and step.pencil.generic.point == (0, 1)
    mu = (0, 1, 2)
    step = realize_step(make_newton_point(GL3, (1, 1, 1)), make_newton_point(GL3, (F(1, 2), F(1, 2), 2)), mu,
                        SampleConfig(mu, seed=2))
    assert step.success


def test_chain_between_equal_points_is_empty():
    v = make_newton_point(GL3, (1, 1, 1))
    assert chain_realization(v, v, (0, 1, 2)) == []
