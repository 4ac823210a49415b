"""Staged isometric embedding of a normed free abelian group into a chain.

Stage ``n`` approximates the target norm on its first ``r_n = min(n, rank)``
basis vectors by a rational finitely generated metric ``d'_n``.  Consecutive
stages are linked by cross generators of weight ``rho_{n-1}`` and glued into
the chain over the image of the previous stage, so the image ``s_j^n`` of the
``j``-th basis vector moves by exactly ``rho_n`` from stage to stage.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .amalgam import h_coordinates
from .approx import NormOracle, approximate_report, rationalize_info
from .errors import ApproximationNotCertified, ConsistencyViolation, PreconditionViolation, RankMismatch
from .fraisse import Chain, amalgam_task, new_chain, run_step
from .vectors import LatticeVector, VectorLike, as_vector, format_rational, l1_ball
from .wordmetric import (
    FinGenMetric,
    ball,
    contraction_mismatch,
    evaluate,
    evaluate_directed,
    isometry_mismatch,
    normalize,
    optimal_decomposition,
)


@dataclass
class RhoSchedule:
    values: list[Fraction]
    source_norms: list[Fraction]

    def rho(self, n: int) -> Fraction:
        """``rho_n`` for ``n >= 1``; beyond the stored prefix only the ``2^-n`` term can bind."""
        if n <= len(self.values):
            return self.values[n - 1]
        floor = 2 * min(self.source_norms) if self.source_norms else None
        r = Fraction(1, 2**n)
        return r if floor is None else min(r, floor)

    def tail(self, n: int) -> Fraction:
        """Exact ``sum_{m >= n} rho_m``."""
        floor = 2 * min(self.source_norms) if self.source_norms else None
        # past the point where 2^-m drops below the floor, the tail is geometric
        start = max(n, len(self.values) + 1)
        m = start
        while floor is not None and Fraction(1, 2**m) > floor:
            m += 1
        total = sum((self.rho(k) for k in range(n, m)), Fraction(0))
        return total + Fraction(2, 2**m)


def rho_schedule(p: NormOracle, depth: int) -> RhoSchedule:
    """``rho_n = min(1/2^n, min_{i <= n} 2 p(z_i))`` for ``n = 1..depth``.

    Only basis vectors that exist are used: for a rank ``r`` target the
    inner minimum runs over ``i <= min(n, r)``.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    norms = [p(LatticeVector.unit(i)) for i in range(p.rank)]
    values = []
    for n in range(1, depth + 1):
        values.append(min([Fraction(1, 2**n)] + [2 * v for v in norms[: min(n, p.rank)]]))
    return RhoSchedule(values, norms)


@dataclass
class StageLink:
    prev: FinGenMetric
    next: FinGenMetric
    linked: FinGenMetric
    rho: Fraction
    radius: Fraction


def link_generators(prev: FinGenMetric, next: FinGenMetric, rho: Fraction) -> FinGenMetric:
    a = prev.rank
    raw = [(g.vector, g.weight) for g in prev.generators]
    raw += [(g.vector.remap(range(a, a + next.rank)), g.weight) for g in next.generators]
    raw += [(LatticeVector.unit(j) - LatticeVector.unit(a + j), rho) for j in range(min(a, next.rank))]
    return normalize(raw, a + next.rank)


def build_stage(prev: FinGenMetric, next: FinGenMetric, rho, radius=None) -> StageLink:
    """Link ``prev`` (coordinates ``[0, a)``) and ``next`` (``[a, a + b)``).

    Preconditions, on the ball of ``radius`` (default twice the largest
    weight): ``next <= prev`` on the shared coordinates, and ``rho`` at most
    twice the smaller basis norm on each linked coordinate.  Afterwards the
    linked metric must agree exactly with ``prev`` on the ball of ``prev``
    and with ``next`` on the ball of ``next``, and every cross distance must
    equal ``rho``.
    """
    rho = Fraction(rho)
    if rho <= 0:
        raise ValueError("rho must be positive")
    a, b = prev.rank, next.rank
    if b < a:
        raise RankMismatch("the next stage must contain the previous coordinates")
    r = 2 * max(prev.max_weight, next.max_weight) if radius is None else Fraction(radius)
    for x, dx in ball(prev, r).items():
        if evaluate(next, x) > dx:
            raise PreconditionViolation(f"next stage exceeds the previous one at {x}", x)
    for j in range(a):
        e = LatticeVector.unit(j)
        floor = 2 * min(evaluate(prev, e), evaluate(next, e))
        if rho > floor:
            raise PreconditionViolation(f"rho {rho} exceeds twice the norm of basis vector {j}", e)
    linked = link_generators(prev, next, rho)
    bad = isometry_mismatch(linked, prev, list(range(a)), r)
    if bad is not None:
        raise ConsistencyViolation(f"linked metric changes the previous stage at {bad}", bad)
    bad = isometry_mismatch(linked, next, list(range(a, a + b)), r)
    if bad is not None:
        raise ConsistencyViolation(f"linked metric changes the next stage at {bad}", bad)
    for j in range(a):
        cross = LatticeVector.unit(j) - LatticeVector.unit(a + j)
        got = evaluate_directed(linked, cross)
        if got != rho:
            raise ConsistencyViolation(f"cross distance {got} on coordinate {j}, expected {rho}", cross)
    return StageLink(prev, next, linked, rho, r)


@dataclass
class StageRecord:
    n: int
    rank: int
    eps_approx: Fraction
    eps_rational: Fraction
    bump: Fraction
    metric: FinGenMetric
    closeness: Fraction  # measured max |d'_n - p| / |x|_1 on the ball


@dataclass
class EmbeddingReport:
    schedule: RhoSchedule
    depth: int
    radius: int
    stages: list[StageLink] = field(default_factory=list)
    approximants: list[StageRecord] = field(default_factory=list)
    generator_tracks: list[list[Optional[int]]] = field(default_factory=list)  # [j][n-1] -> chain coordinate
    tail_bounds: list[Fraction] = field(default_factory=list)
    ball_errors: list[Fraction] = field(default_factory=list)
    cross_distances: list[list[Fraction]] = field(default_factory=list)  # [n-1][j] = d(s_j^n, s_j^{n+1})
    chain: Optional[Chain] = None
    error: Optional[Fraction] = None

    @property
    def bound(self) -> Fraction:
        return self.schedule.rho(self.depth) + self.tail_bounds[-1]

    def stage_element(self, n: int, k: VectorLike) -> LatticeVector:
        """``sum_j k_j s_j^n`` in chain coordinates."""
        return LatticeVector((self.generator_tracks[j][n - 1], c) for j, c in as_vector(k).items())


def stage_ranks(p: NormOracle, depth: int) -> list[int]:
    return [min(n, p.rank) for n in range(1, depth + 1)]


def embed_group(
    p: NormOracle,
    depth: int,
    eps_profile: Optional[Sequence[Fraction]] = None,
    chain: Optional[Chain] = None,
    radius: int = 4,
    approx_retries: int = 3,
    chain_radius: Optional[Fraction] = None,
) -> tuple[Chain, EmbeddingReport]:
    """Realize ``depth`` stages of the embedding of ``(Z^rank, p)`` in a chain.

    ``eps_profile[n-1]`` (default ``rho_n / 2``) is the approximation target
    of stage ``n``; the rationalization step adds at most ``rho_n / 2`` more.
    Each approximant keeps the previous one's generators with the same oracle
    weights, and its rationalizing bump never exceeds the previous bump, so
    ``p <= d'_n <= d'_{n-1}`` on the shared coordinates.

    ``radius`` bounds the l1 balls used to certify approximants and measure
    errors.  ``chain_radius`` is the metric ball on which each gluing step
    into the chain is verified; by default the largest basis norm of ``p``
    for the first stage and the linking weight ``rho_{n-1}`` afterwards,
    since balls of the chain grow quickly once light cross generators exist.
    The linked metrics themselves are verified by :func:`build_stage`.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    sched = rho_schedule(p, depth)
    ranks = stage_ranks(p, depth)
    if eps_profile is None:
        eps_profile = [sched.rho(n) / 2 for n in range(1, depth + 1)]
    eps_profile = [Fraction(e) for e in eps_profile]
    for n, e in enumerate(eps_profile[:depth], 1):
        if not 0 < e <= sched.rho(n):
            raise PreconditionViolation(f"eps for stage {n} must lie in (0, rho_{n}]")
    c = chain if chain is not None else new_chain()
    report = EmbeddingReport(sched, depth, radius)
    tracks: list[list[Optional[int]]] = [[None] * depth for _ in range(p.rank)]
    prev_raw: Optional[FinGenMetric] = None
    prev_metric: Optional[FinGenMetric] = None
    prev_bump: Optional[Fraction] = None
    for n in range(1, depth + 1):
        rn = ranks[n - 1]
        pn = p.restrict(rn)
        rho_n = sched.rho(n)
        include = [g.vector for g in prev_raw.generators] if prev_raw is not None else []
        try:
            res = approximate_report(pn, eps_profile[n - 1], radius=radius, retries=approx_retries, include=include)
        except ApproximationNotCertified as exc:
            report.generator_tracks = tracks
            report.chain = c
            exc.partial = (c, report)
            raise
        raw = res.metric
        slack = rho_n - res.worst_ratio
        eps_r = min(rho_n / 2, slack) if slack > 0 else rho_n / 2
        info = rationalize_info(raw, eps_r)
        if prev_bump is not None and info.bump > prev_bump:
            eps_r = prev_bump * 4 * info.K / 3
            info = rationalize_info(raw, eps_r)
        dn = normalize(((g.vector, g.weight + info.bump) for g in raw.orbits()), rn)
        closeness = max(
            (abs(evaluate(dn, x) - pn(x)) / x.l1 for x in l1_ball(rn, radius, include_zero=False)),
            default=Fraction(0),
        )
        if closeness > rho_n:
            raise ConsistencyViolation(f"stage {n} is {closeness}-close, above rho_{n} = {rho_n}")
        report.approximants.append(StageRecord(n, rn, eps_profile[n - 1], eps_r, info.bump, dn, closeness))
        if prev_metric is None:
            h, f_embed = dn, []
        else:
            link = build_stage(prev_metric, dn, sched.rho(n - 1))
            report.stages.append(link)
            h = link.linked
            f_embed = [tracks[j][n - 2] for j in range(prev_metric.rank)]
        before = c.last.rank
        if chain_radius is not None:
            glue = Fraction(chain_radius)
        elif prev_metric is None:
            glue = max(sched.source_norms)
        else:
            glue = sched.rho(n - 1)
        c = run_step(c, amalgam_task(len(c.stages) - 1, f_embed, h, glue))
        place = h_coordinates(before, f_embed, h.rank)
        offset = 0 if prev_metric is None else prev_metric.rank
        for j in range(rn):
            tracks[j][n - 1] = place[offset + j]
        # later gluings are isometric on this stage, so measuring now is final
        report.ball_errors.append(_stage_error(c.last, tracks, n, dn, p, radius))
        prev_raw, prev_metric, prev_bump = raw, dn, info.bump
    report.generator_tracks = tracks
    report.chain = c
    final = c.last
    for n in range(1, depth):
        row = []
        for j in range(ranks[n - 1]):
            d = evaluate(final, LatticeVector.unit(tracks[j][n - 1]) - LatticeVector.unit(tracks[j][n]))
            if d != sched.rho(n):
                raise ConsistencyViolation(f"d(s_{j + 1}^{n}, s_{j + 1}^{n + 1}) = {d}, expected rho_{n}")
            row.append(d)
        report.cross_distances.append(row)
    report.tail_bounds = [sched.tail(n) for n in range(1, depth + 1)]
    report.error = report.ball_errors[-1]
    return c, report


class TopStageGauge:
    """Exact chain norms of elements ``sum k_j s_j^n`` of the newest stage ``n``.

    Collapsing every tracked ``s_j^m`` to ``z_j`` (and the other coordinates
    to 0) maps the chain onto ``d'_n``; when no generator is stretched this
    gives ``d'_n(k)`` as a lower bound.  An optimal ``d'_n`` decomposition of
    ``k`` carried along the level ``n`` track, priced with the chain's own
    weights, gives an upper bound.  Equal bounds are the exact value;
    otherwise the guided search runs with the upper bound as a cap.
    """

    def __init__(self, chain_metric: FinGenMetric, tracks, n: int, dn: FinGenMetric):
        self.metric = chain_metric
        self.level = [t[n - 1] for t in tracks[: dn.rank]]
        self.dn = dn
        images = [LatticeVector(())] * chain_metric.rank
        for j, t in enumerate(tracks[: dn.rank]):
            for c in t[:n]:
                if c is not None:
                    images[c] = LatticeVector.unit(j)
        self.contracts = contraction_mismatch(chain_metric, images, dn) is None
        self.weights = chain_metric.weights

    def element(self, k: LatticeVector) -> LatticeVector:
        return LatticeVector((self.level[j], c) for j, c in k.items())

    def upper(self, k: LatticeVector) -> Optional[Fraction]:
        total = Fraction(0)
        for g in optimal_decomposition(self.dn, k).parts:
            w = self.weights.get(self.element(g.vector))
            if w is None:
                return None
            total += w
        return total

    def norm(self, k: LatticeVector) -> Fraction:
        up = self.upper(k)
        if self.contracts and up is not None and up == evaluate(self.dn, k):
            return up
        return evaluate_directed(self.metric, self.element(k), up)


def _stage_error(
    chain_metric: FinGenMetric, tracks, n: int, dn: FinGenMetric, p: NormOracle, R: int
) -> Fraction:
    gauge = TopStageGauge(chain_metric, tracks, n, dn)
    worst = Fraction(0)
    for k in l1_ball(dn.rank, R, include_zero=False):
        if (-k).sort_key() < k.sort_key():
            continue  # both norms are symmetric
        worst = max(worst, abs(gauge.norm(k) - p(k)) / k.l1)
    return worst


def verify_embedding(report: EmbeddingReport, p: NormOracle, R: int) -> Fraction:
    """``max |d(sum k_j s_j^n) - p(sum k_j z_j)| / |k|_1`` over ``0 < |k|_1 <= R`` at the last stage.

    ``d`` is the last chain stage; see :class:`TopStageGauge`.
    """
    if R < 1:
        raise ValueError("R must be at least 1")
    n = report.depth
    return _stage_error(report.chain.last, report.generator_tracks, n, report.approximants[n - 1].metric, p, R)


def format_report(report: EmbeddingReport) -> str:
    f = format_rational
    out = ["embedding v1", f"depth {report.depth}", f"radius {report.radius}"]
    for n in range(1, report.depth + 1):
        out.append(f"rho {n} {f(report.schedule.rho(n))} tail {f(report.tail_bounds[n - 1])}")
    for rec, err in zip(report.approximants, report.ball_errors):
        out.append(
            f"stage {rec.n} rank {rec.rank} eps {f(rec.eps_approx)} bump {f(rec.bump)} "
            f"closeness {f(rec.closeness)} error {f(err)}"
        )
    for n, row in enumerate(report.cross_distances, 1):
        for j, d in enumerate(row, 1):
            out.append(f"cross {n} {j} {f(d)}")
    for j, t in enumerate(report.generator_tracks, 1):
        out.append(f"track {j} " + " ".join("-" if c is None else str(c) for c in t))
    out.append(f"bound {f(report.bound)}")
    out.append(f"error {f(report.error)}")
    return "\n".join(out) + "\n"
