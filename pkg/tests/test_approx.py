from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from univgroup.approx import (
    ApproxParams,
    NormOracle,
    approximate,
    approximate_report,
    b_k_upper,
    min_ratio,
    rationalize,
    rationalize_info,
    sample_set,
)
from univgroup.errors import OracleAxiomViolation, OracleDomainError, RankMismatch
from univgroup.suites import brute_force_min_ratio, rationalize_violation
from univgroup.vectors import LatticeVector, l1_ball
from univgroup.wordmetric import evaluate, normalize

from conftest import E1, E2
from strategies import metrics

V = LatticeVector.of


def excess(a, rank):
    return NormOracle(rank, lambda x: a * x.l1 + Fraction(x.l1, 1 + x.l1), "excess")


# -- B_k ---------------------------------------------------------------------------------


def test_min_ratio_examples():
    assert min_ratio(1, 1, V(7)) == 0
    assert min_ratio(2, 1, V(1, 2)) == Fraction(1, 3)
    assert min_ratio(2, 3, V(-3, 2)) == 0
    assert min_ratio(2, 1, V(2, 1)) == Fraction(1, 3)


@given(st.integers(1, 3), st.lists(st.integers(-5, 5), min_size=2, max_size=2))
def test_min_ratio_matches_brute_force(k, c):
    x = LatticeVector.from_dense(c)
    if x.is_zero():
        return
    assert min_ratio(2, k, x) == brute_force_min_ratio(k, x)


def test_b_k_examples():
    for k in (1, 2, 4):
        b = b_k_upper(1, k, 10)
        assert b.empirical == b.certified == b.tail_bound == 0
    for k, want in ((1, Fraction(1, 3)), (2, Fraction(1, 4)), (4, Fraction(1, 6)), (8, Fraction(1, 10))):
        b = b_k_upper(2, k, 12)
        assert b.empirical == want and b.witness == V(k + 1, 1)
        assert b.threshold == 7
        assert b.tail_bound == Fraction(k + 1, 7) + Fraction(1, k)
        assert b.certified >= b.empirical
    with pytest.raises(ValueError):
        b_k_upper(2, 0, 3)


def test_b_k_empirical_matches_brute_force():
    b = b_k_upper(2, 2, 6)
    assert b.empirical == max(brute_force_min_ratio(2, x) for x in l1_ball(2, 6, include_zero=False))


# -- oracles -----------------------------------------------------------------------------


def test_oracle_rejects_bad_answers():
    with pytest.raises(OracleAxiomViolation):
        NormOracle(1, lambda x: 1.5 * x.l1)(V(1))
    with pytest.raises(OracleAxiomViolation):
        NormOracle(1, lambda x: Fraction(x[0] + 2) if x else Fraction(0))(V(1))
    with pytest.raises(OracleAxiomViolation):
        NormOracle(1, lambda x: Fraction(0))(V(1))
    with pytest.raises(OracleAxiomViolation):
        NormOracle(1, lambda x: Fraction(1))(V())
    square = NormOracle(1, lambda x: Fraction(x.l1**2))
    square(V(1))
    with pytest.raises(OracleAxiomViolation):
        square(V(2))
    with pytest.raises(OracleAxiomViolation):
        NormOracle(1, lambda x: Fraction(x.l1**2)).check_axioms(2)


def test_oracle_table_and_rank():
    p = NormOracle.from_table(1, {V(1): Fraction(1), V(-1): Fraction(1)})
    assert p(V(1)) == 1 and p(V()) == 0
    with pytest.raises(OracleDomainError):
        p(V(2))
    with pytest.raises(RankMismatch):
        p(V(0, 1))
    with pytest.raises(RankMismatch):
        p.restrict(2)


def test_params_validation():
    with pytest.raises(ValueError):
        ApproxParams(m0=2, m1=1, m=1)
    with pytest.raises(ValueError):
        ApproxParams(epsilon=0)
    assert ApproxParams(epsilon="1/3").epsilon == Fraction(1, 3)


# -- approximation -------------------------------------------------------------------------


def test_sample_set_is_nested():
    small, big = sample_set(2, 1, 2), sample_set(2, 2, 4)
    assert small <= big and LatticeVector() in small
    assert len(sample_set(1, 1, 3)) == 7


def test_generated_norms_are_exact():
    l1 = normalize([(E1, 1), (E2, 1)], 2)
    res = approximate_report(NormOracle.from_metric(l1), Fraction(1, 4), radius=4)
    assert res.worst_ratio == 0
    twice = NormOracle(2, lambda x: 2 * x.l1)
    dF = approximate(twice, Fraction(1, 10), radius=4)
    assert all(evaluate(dF, x) == 2 * x.l1 for x in l1_ball(2, 4))


@pytest.mark.parametrize("a, rank", [(Fraction(1), 1), (Fraction(1, 2), 1)])
def test_excess_norm_approximation(a, rank):
    p = excess(a, rank)
    eps = Fraction(1, 4)
    res = approximate_report(p, eps, radius=4)
    assert res.worst_ratio <= eps
    for x in l1_ball(rank, 4, include_zero=False):
        d = evaluate(res.metric, x)
        assert p(x) <= d <= p(x) + eps * x.l1


def test_approximation_rejects_bad_eps():
    p = excess(Fraction(1), 1)
    with pytest.raises(ValueError):
        approximate(p, 0)
    with pytest.raises(ValueError):
        approximate(p, Fraction(1, 2), radius=0)


# -- rationalization -----------------------------------------------------------------------


def test_rationalize_example():
    m = normalize([(E1, 1), (E2, 2)], 2)
    info = rationalize_info(m, Fraction(1, 2))
    assert (info.M, info.K, info.bump) == (2, 2, Fraction(3, 16))
    r = rationalize(m, Fraction(1, 2))
    assert r.weights[E1] == Fraction(19, 16) and r.weights[E2] == Fraction(35, 16)


@given(metrics(), st.sampled_from([Fraction(1, 2), Fraction(1, 8)]))
def test_rationalize_bounds(m, eps):
    assert rationalize_violation(m, eps, 4) is None
