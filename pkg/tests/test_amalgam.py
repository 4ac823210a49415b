import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from univgroup.amalgam import AmalgamSpec, amalgamate, extend_over, split_norm
from univgroup.errors import RankMismatch, SharedPartMismatch
from univgroup.katetov import KatetovFn, katetov_extend
from univgroup.suites import amalgam_violation, random_amalgam
from univgroup.vectors import LatticeVector, l1_ball
from univgroup.wordmetric import evaluate, normalize, permute, restriction_mismatch

V = LatticeVector.of


def test_three_generator_example():
    left = normalize([(V(1, 0), 1), (V(0, 1), 2)], 2)
    right = normalize([(V(1, 0), 1), (V(0, 1), 3)], 2)
    out = amalgamate(AmalgamSpec(1, left, right))
    assert out.rank == 3
    assert evaluate(out, V(0, 1, -1)) == 5
    assert evaluate(out, V(0, 1, 0)) == 2
    assert evaluate(out, V(0, 0, 1)) == 3


def test_right_equal_to_shared_gives_left(z1):
    left = katetov_extend(KatetovFn.of(z1, [(V(1), 1), (V(-1), 1)]))
    assert amalgamate(AmalgamSpec(1, left, z1)) == left


def test_shared_rank_zero(z1):
    out = amalgamate(AmalgamSpec(0, z1, z1))
    assert out.rank == 2
    assert evaluate(out, V(1, 1)) == 2
    assert split_norm(AmalgamSpec(0, z1, z1), V(1, 1), 2) == 2


def test_shared_mismatch(z1):
    other = normalize([(V(1), 2)], 1)
    with pytest.raises(SharedPartMismatch):
        amalgamate(AmalgamSpec(1, z1, other))
    with pytest.raises(RankMismatch):
        AmalgamSpec(2, z1, z1)


def test_extend_over_examples(z1):
    h = katetov_extend(KatetovFn.of(z1, [(V(1), 1), (V(-1), 1)]))
    out = extend_over(z1, [0], h)
    assert evaluate(out, V(-1, 1)) == 1
    assert restriction_mismatch(out, z1, [0], 4) is None
    assert extend_over(z1, [0], z1) == z1
    third = normalize([(V(1), Fraction(1, 3))], 1)
    out = extend_over(z1, [], third)
    assert out.rank == 2 and evaluate(out, V(0, 1)) == Fraction(1, 3)
    assert evaluate(out, V(1, 0)) == 1


def test_extend_over_permuted_block():
    stage = normalize([(V(1, 0), 1), (V(0, 1), 2)], 2)
    h = normalize([(V(1), 2)], 1)
    h = katetov_extend(KatetovFn.of(h, [(V(1), 1)]))
    out = extend_over(stage, [1], h)
    assert evaluate(out, V(0, -1, 1)) == 1
    assert restriction_mismatch(out, stage, [0, 1], 4) is None
    with pytest.raises(RankMismatch):
        extend_over(stage, [1, 1], h)


@given(st.integers(0, 10**6))
def test_random_amalgams(seed):
    assert amalgam_violation(random_amalgam(random.Random(seed))) is None


@given(st.integers(0, 10**6))
def test_commutativity(seed):
    spec = random_amalgam(random.Random(seed))
    s, p, q = spec.shared_rank, spec.left_private, spec.right_private
    a = amalgamate(spec)
    b = amalgamate(AmalgamSpec(s, spec.right, spec.left))
    # b lists shared, right-private, left-private; move it to a's order
    perm = list(range(s)) + [s + p + i for i in range(q)] + [s + i for i in range(p)]
    assert permute(b, perm) == a
    for x in l1_ball(a.rank, 2):
        assert evaluate(a, x) == evaluate(b, x.remap({v: k for k, v in enumerate(perm)}))
