from fractions import Fraction

import pytest
from hypothesis import given

from univgroup.errors import ParseError, ZeroWeightNonzeroVector
from univgroup.textio import (
    ball_tsv,
    parse_katetov,
    parse_metric,
    parse_oracle_table,
    write_katetov,
    write_metric,
    write_oracle_table,
)
from univgroup.vectors import LatticeVector, format_rational, l1_ball, l1_sphere, parse_rational

from strategies import metrics

V = LatticeVector.of


def test_parse_metric_examples():
    m = parse_metric("metric v1\nrank 1\ngen 1 w 1\n")
    assert m.weights == {V(1): 1, V(-1): 1}
    m = parse_metric("# comment\nmetric v1\nrank 2\ngen 1 0 w 1\ngen 0 1 w 3/2  # trailing\n")
    assert m.weights[V(0, 1)] == Fraction(3, 2)
    with pytest.raises(ZeroWeightNonzeroVector):
        parse_metric("metric v1\nrank 2\ngen 0 0 w 1\ngen 1 0 w 1\ngen 0 1 w 1\n")


@pytest.mark.parametrize(
    "text, line",
    [
        ("metric v2\nrank 1\ngen 1 w 1\n", 1),
        ("metric v1\nrank x\n", 2),
        ("metric v1\nrank 1\ngen x w 1\n", 3),
        ("metric v1\nrank 1\ngen 1 w 1/0\n", 3),
        ("metric v1\nrank 1\ngen 1 1 w 1\n", 3),
        ("metric v1\nrank 1\ngen 1 v 1\n", 3),
    ],
)
def test_parse_metric_errors_carry_line_numbers(text, line):
    with pytest.raises(ParseError) as err:
        parse_metric(text)
    assert err.value.line == line


def test_parse_metric_truncated():
    with pytest.raises(ParseError):
        parse_metric("metric v1\n")


@given(metrics())
def test_metric_round_trip(m):
    text = write_metric(m)
    assert parse_metric(text) == m
    assert write_metric(parse_metric(text)) == text


def test_katetov_round_trip(z1):
    values = {V(1): Fraction(1), V(-1): Fraction(1)}
    text = write_katetov("z.metric", values, 1)
    path, back, base = parse_katetov(text, lambda p: z1)
    assert path == "z.metric" and back == values and base == z1
    with pytest.raises(ParseError):
        parse_katetov(text + "point 1 f 2\n", lambda p: z1)


def test_oracle_table_round_trip():
    table = {V(1, 0): Fraction(1), V(0, 1): Fraction(3, 2)}
    rank, back = parse_oracle_table(write_oracle_table(2, table))
    assert rank == 2 and back == table
    with pytest.raises(ParseError):
        parse_oracle_table("oracle v1\nrank 1\npoint 1 value 1\npoint 1 value 2\n")


def test_ball_tsv(z1):
    rows = list(ball_tsv(1, [(V(), Fraction(0)), (V(1), Fraction(3, 2))]))
    assert rows == ["x1\tdelta_num\tdelta_den", "0\t0\t1", "1\t3\t2"]


def test_rationals():
    assert parse_rational("3/2") == Fraction(3, 2)
    assert parse_rational("-4") == -4
    assert format_rational(Fraction(6, 4)) == "3/2"
    assert format_rational(Fraction(4, 2)) == "2"
    for bad in ("1.5", "a", "1/", ""):
        with pytest.raises((ValueError, ZeroDivisionError)):
            parse_rational(bad)


def test_lattice_vectors():
    x = LatticeVector({0: 2, 3: 0, 1: -1})
    assert x.items() == ((0, 2), (1, -1))
    assert x.l1 == 3 and x.linf == 2 and x.support_size == 2
    assert x - x == LatticeVector() and not (x - x)
    assert x * 0 == LatticeVector() and x * -2 == LatticeVector({0: -4, 1: 2})
    assert hash(x + LatticeVector()) == hash(x)
    assert len(list(l1_ball(2, 2))) == 13
    assert len(list(l1_sphere(3, 1))) == 6


def test_lattice_vector_is_not_iterable():
    with pytest.raises(TypeError):
        list(V(1, 2))
