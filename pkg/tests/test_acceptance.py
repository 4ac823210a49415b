"""Acceptance criteria, each at its stated size, tolerance and time limit.

Every test prints one ``criterion N: PASS`` or ``FAIL`` line, shown even
when pytest captures output.
"""

import random
import time
from fractions import Fraction

import pytest

from univgroup.approx import NormOracle, b_k_upper
from univgroup.fraisse import check_extension_property, load, new_chain, replay, save, service
from univgroup.suites import (
    amalgam_violation,
    approximation_violation,
    axiom_violation,
    embedding_violation,
    katetov_violation,
    oracle_mismatch,
    random_amalgam,
    random_katetov,
    random_metric,
    rationalize_violation,
)
from univgroup.vectors import LatticeVector, l1_ball
from univgroup.wordmetric import (
    evaluate,
    normalize,
    positivity_floor,
    stable_norm_lp,
    stable_norm_upper,
)

E1, E2 = LatticeVector.of(1, 0), LatticeVector.of(0, 1)


@pytest.fixture
def report(capsys):
    """Check the failures and runtime of one criterion and print its verdict line."""

    def finish(number: int, failures: list, started: float, limit: float, detail: str = "") -> None:
        elapsed = time.perf_counter() - started
        ok = not failures and elapsed < limit
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} ({elapsed:.1f} s, limit {limit:.0f} s)"
        if detail:
            line += f" {detail}"
        if failures:
            line += f"; first failure: {failures[0]}"
        with capsys.disabled():
            print("\n" + line)
        assert not failures, failures[:5]
        assert elapsed < limit, f"took {elapsed:.1f} s"

    return finish


def word_metric_instances():
    rng = random.Random(2024)
    return [random_metric(rng, max_ratio=Fraction(4)) for _ in range(200)]


def test_criterion_1_word_metric_oracle(report):
    started = time.perf_counter()
    failures = []
    for i, m in enumerate(word_metric_instances()):
        bad = oracle_mismatch(m, 6)
        if bad:
            failures.append(f"instance {i}: {bad}")
    report(1, failures, started, 60, "200 instances, |x|_1 <= 6")


def test_criterion_2_metric_axioms(report):
    started = time.perf_counter()
    failures = []
    for i, m in enumerate(word_metric_instances()):
        bad = axiom_violation(m, 3 * m.max_weight)
        if bad:
            failures.append(f"instance {i}: {bad}")
    report(2, failures, started, 60, "200 instances, r = 3 max weight")


def test_criterion_3_katetov_realization(report):
    started = time.perf_counter()
    rng = random.Random(3)
    failures = []
    for i in range(100):
        base = random_metric(rng, max_rank=2, max_orbits=3, top=4, max_ratio=Fraction(4))
        values = random_katetov(rng, base, 3)
        bad = katetov_violation(base, values)
        if bad:
            failures.append(f"instance {i}: {bad}")
    report(3, failures, started, 120, "100 valid functions, |domain| <= 3")


def test_criterion_4_amalgamation(report):
    started = time.perf_counter()
    rng = random.Random(4)
    failures = []
    for i in range(100):
        bad = amalgam_violation(random_amalgam(rng))
        if bad:
            failures.append(f"instance {i}: {bad}")
    report(4, failures, started, 120, "100 amalgams")


def test_criterion_5_rationalization(report):
    started = time.perf_counter()
    rng = random.Random(5)
    failures = []
    for i in range(50):
        m = random_metric(rng, max_ratio=Fraction(4))
        for eps in (Fraction(1, 2), Fraction(1, 8)):
            bad = rationalize_violation(m, eps, 6)
            if bad:
                failures.append(f"instance {i}, eps {eps}: {bad}")
    report(5, failures, started, 60, "50 metrics, eps 1/2 and 1/8, R = 6")


def _bounded_excess(a: Fraction, rank: int) -> NormOracle:
    """``a |k|_1 + |k|_1 / (1 + |k|_1)``, a norm that is not finitely generated."""
    return NormOracle(rank, lambda x: a * x.l1 + Fraction(x.l1, 1 + x.l1), f"excess {a} on Z^{rank}")


def _black_box(m) -> NormOracle:
    return NormOracle(m.rank, lambda x: evaluate(m, x), "black box")


def approximation_oracles() -> list[NormOracle]:
    hex_ = normalize([(E1, 1), (E2, 1), (E1 + E2, 1)], 2)
    l1 = normalize([(E1, 1), (E2, 1)], 2)
    oracles = [
        NormOracle(1, lambda x: Fraction(3, 2) * x.l1, "3/2 |k|"),
        NormOracle(2, lambda x: 2 * evaluate(l1, x), "2 l1"),
        NormOracle(2, lambda x: evaluate(hex_, x) / 2, "hex / 2"),
        _bounded_excess(Fraction(1), 1),
        _bounded_excess(Fraction(1, 2), 1),
        _bounded_excess(Fraction(1), 2),
    ]
    rng = random.Random(6)
    while len(oracles) < 10:
        oracles.append(_black_box(random_metric(rng, max_rank=2, max_orbits=3, top=4, max_ratio=Fraction(2))))
    return oracles


def test_criterion_6_approximation(report):
    started = time.perf_counter()
    failures = []
    for p in approximation_oracles():
        for eps in (Fraction(1, 2), Fraction(1, 4)):
            bad = approximation_violation(p, eps, 8)
            if bad:
                failures.append(f"{p.name}, eps {eps}: {bad}")
    report(6, failures, started, 300, "10 oracles, eps 1/2 and 1/4, R = 8")


def test_criterion_7_b_k(report):
    started = time.perf_counter()
    failures = []
    for k in (1, 2, 4, 8):
        if b_k_upper(1, k, 12).empirical != 0 or b_k_upper(1, k, 12).certified != 0:
            failures.append(f"n = 1, k = {k}: nonzero")
    rows = [b_k_upper(2, k, 12) for k in (1, 2, 4, 8)]
    emp = [r.empirical for r in rows]
    if any(a < b for a, b in zip(emp, emp[1:])):
        failures.append(f"n = 2 empirical values increase: {emp}")
    for k, r in zip((1, 2, 4, 8), rows):
        formula = Fraction(k + 1, r.threshold) + Fraction(1, k)
        if r.tail_bound != formula or r.certified < r.empirical or r.certified > max(formula, r.empirical):
            failures.append(f"n = 2, k = {k}: certified {r.certified}, formula {formula}")
    report(7, failures, started, 60, "b_k for n = 2: " + ", ".join(str(e) for e in emp))


def embedding_targets() -> list[NormOracle]:
    targets = {
        "l1": [(E1, 1), (E2, 1)],
        "hex": [(E1, 1), (E2, 1), (E1 + E2, 1)],
        "skew": [(E1, 1), (E2, Fraction(3, 2)), (E1 + E2, 2), (E1 - E2, Fraction(5, 3))],
        "small": [(E1, Fraction(1, 8)), (E2, Fraction(1, 4)), (E1 - E2, Fraction(1, 4))],
        "long": [(E1, 2), (E2, 3), (E1 + E2, 4)],
    }
    return [NormOracle.from_metric(normalize(gens, 2), name) for name, gens in targets.items()]


def test_criterion_8_embedding(report):
    started = time.perf_counter()
    failures = []
    for p in embedding_targets():
        bad = embedding_violation(p, 5, 4)
        if bad:
            failures.append(f"{p.name}: {bad}")
    report(8, failures, started, 600, "5 metrics on Z^2, depth 5, R = 4")


@pytest.fixture(scope="module")
def serviced_chain():
    seed = normalize([(LatticeVector.of(1), 1)], 1)
    started = time.perf_counter()
    c, log = service(new_chain(seed), 2, radius=1)
    return seed, c, log, time.perf_counter() - started


def test_criterion_9_extension_property(report, serviced_chain):
    seed, c, log, build_time = serviced_chain
    started = time.perf_counter() - build_time
    ext = check_extension_property(c, 2)
    failures = [t.describe() for t in ext.unrealized]
    report(
        9,
        failures,
        started,
        300,
        f"{len(ext.realized)} tasks realized, {len(log.ran)} run, final rank {c.last.rank}",
    )


def test_criterion_10_stable_norm_positivity(report, serviced_chain):
    _, c, _, _ = serviced_chain
    started = time.perf_counter()
    failures = []
    checked = 0
    for i, m in enumerate(c.stages):
        for x in l1_ball(m.rank, 1, include_zero=False):
            lp = stable_norm_lp(m, x)
            floor = positivity_floor(m, x)
            upper = stable_norm_upper(m, x, 8).value_upper
            checked += 1
            if not 0 < floor <= lp <= upper:
                failures.append(f"stage {i} at {x}: floor {floor}, lp {lp}, upper {upper}")
    report(10, failures, started, 120, f"{checked} points over {len(c.stages)} stages")


def test_criterion_11_persistence(report, serviced_chain):
    seed, c, _, _ = serviced_chain
    started = time.perf_counter()
    failures = []
    text = save(c)
    again = load(text)
    if save(again) != text:
        failures.append("save(load(text)) differs from text")
    if again != c:
        failures.append("loaded chain differs")
    if replay(seed, c.step_log).stages != c.stages:
        failures.append("log replay differs")
    report(11, failures, started, 30, f"{len(c.stages)} stages, {len(text)} bytes")
