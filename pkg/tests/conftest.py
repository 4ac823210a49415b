from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings

from univgroup.vectors import LatticeVector
from univgroup.wordmetric import normalize

settings.register_profile(
    "repo", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("repo")

E1, E2 = LatticeVector.of(1, 0), LatticeVector.of(0, 1)


@pytest.fixture
def z1():
    return normalize([(LatticeVector.of(1), 1)], 1)


@pytest.fixture
def z2():
    """Z^2 with e1, e2 of weight 1 and e1 + e2 of weight 3/2."""
    return normalize([(E1, 1), (E2, 1), (E1 + E2, Fraction(3, 2))], 2)
