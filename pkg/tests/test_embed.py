from fractions import Fraction

import pytest

from univgroup import embed
from univgroup.approx import NormOracle
from univgroup.embed import TopStageGauge, build_stage, embed_group, format_report, rho_schedule, verify_embedding
from univgroup.errors import ApproximationNotCertified, PreconditionViolation, RankMismatch
from univgroup.vectors import LatticeVector, l1_ball
from univgroup.wordmetric import evaluate, evaluate_directed, normalize

from conftest import E1, E2

V = LatticeVector.of


def test_rho_schedule_examples(z1):
    s = rho_schedule(NormOracle.from_metric(z1), 3)
    assert s.values == [Fraction(1, 2), Fraction(1, 4), Fraction(1, 8)]
    assert s.tail(1) == 1 and s.tail(4) == Fraction(1, 8)
    small = NormOracle(1, lambda x: Fraction(x.l1, 8))
    assert rho_schedule(small, 1).values == [Fraction(1, 4)]
    assert rho_schedule(small, 4).tail(2) == Fraction(1, 4) + Fraction(1, 8) + Fraction(1, 8)
    with pytest.raises(ValueError):
        rho_schedule(small, 0)


def test_tail_matches_partial_sums():
    s = rho_schedule(NormOracle(2, lambda x: Fraction(x.l1, 16)), 3)
    partial = sum(s.rho(m) for m in range(2, 60))
    assert 0 <= s.tail(2) - partial < Fraction(1, 2**58)


def test_build_stage_example(z1):
    l1 = normalize([(E1, 1), (E2, 1)], 2)
    link = build_stage(z1, l1, Fraction(1, 2))
    assert link.linked.rank == 3
    assert evaluate(link.linked, V(1, -1, 0)) == Fraction(1, 2)
    assert evaluate(link.linked, V(1)) == 1
    assert evaluate(link.linked, V(0, 0, 1)) == 1
    assert evaluate(link.linked, V(1, 0, -1)) == 2


def test_build_stage_preconditions(z1):
    with pytest.raises(PreconditionViolation):
        build_stage(z1, z1, 3)
    heavy = normalize([(V(1), 2)], 1)
    with pytest.raises(PreconditionViolation):
        build_stage(z1, heavy, Fraction(1, 2))
    with pytest.raises(RankMismatch):
        build_stage(normalize([(E1, 1), (E2, 1)], 2), z1, Fraction(1, 2))
    with pytest.raises(ValueError):
        build_stage(z1, z1, 0)


def test_embed_integers(z1):
    p = NormOracle.from_metric(z1)
    chain, rep = embed_group(p, 3)
    assert rep.cross_distances == [[Fraction(1, 2)], [Fraction(1, 4)]]
    assert rep.error <= rep.bound
    assert verify_embedding(rep, p, 4) == rep.error
    assert len(chain) == 4


def test_embed_depth_one(z1):
    p = NormOracle.from_metric(z1)
    _, rep = embed_group(p, 1)
    assert rep.stages == [] and rep.cross_distances == []
    assert rep.error <= rep.schedule.rho(1)


def test_gauge_matches_direct_search():
    hexagonal = normalize([(E1, 1), (E2, 1), (E1 + E2, 1)], 2)
    p = NormOracle.from_metric(hexagonal)
    chain, rep = embed_group(p, 3)
    n = rep.depth
    gauge = TopStageGauge(chain.last, rep.generator_tracks, n, rep.approximants[n - 1].metric)
    for k in l1_ball(2, 2, include_zero=False):
        assert gauge.norm(k) == evaluate_directed(chain.last, rep.stage_element(n, k))


def test_partial_report_on_failed_stage(monkeypatch, z1):
    real = embed.approximate_report
    calls = []

    def fail_second(p, eps, **kw):
        calls.append(eps)
        if len(calls) == 2:
            raise ApproximationNotCertified("forced", eps, None)
        return real(p, eps, **kw)

    monkeypatch.setattr(embed, "approximate_report", fail_second)
    with pytest.raises(ApproximationNotCertified) as err:
        embed_group(NormOracle.from_metric(z1), 3)
    chain, rep = err.value.partial
    assert len(rep.approximants) == 1 and len(chain) == 2
    assert rep.generator_tracks == [[0, None, None]]


def test_embed_rejects_bad_profiles(z1):
    p = NormOracle.from_metric(z1)
    with pytest.raises(PreconditionViolation):
        embed_group(p, 1, eps_profile=[1])
    with pytest.raises(ValueError):
        embed_group(p, 0)


def test_format_report(z1):
    _, rep = embed_group(NormOracle.from_metric(z1), 2)
    lines = format_report(rep).splitlines()
    assert lines[:3] == ["embedding v1", "depth 2", "radius 4"]
    assert "rho 1 1/2 tail 1" in lines and "cross 1 1 1/2" in lines
    assert lines[-2].startswith("bound ") and lines[-1].startswith("error ")
    assert any(l.startswith("track 1 ") for l in lines)
