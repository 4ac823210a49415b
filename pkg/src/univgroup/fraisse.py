"""Chains of metric stages built by one-step extensions, with persistence.

A chain starts from a seed stage (rank 0 by default).  Each step appends a
stage that contains the previous one as its initial coordinate block, either
by a Katětov extension or by amalgamating a finitely generated group over a
block of existing coordinates.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import Optional, Union

from .amalgam import extend_over
from .errors import ParseError, RankMismatch, VerificationFailure
from .katetov import KatetovFn, default_radius, katetov_extend, validate_katetov
from .textio import Lines, read_metric, read_points, write_metric, write_points
from .vectors import LatticeVector, format_rational, l1_ball
from .wordmetric import FinGenMetric, evaluate_capped, normalize, restriction_mismatch

KATETOV = "katetov"
AMALGAM = "amalgam"


@dataclass(frozen=True)
class Extension:
    """Payload of an amalgam step: ``h`` glued over ``F``.

    ``F`` is the first ``len(f_embed)`` coordinates of ``h``; coordinate ``i``
    of ``F`` is coordinate ``f_embed[i]`` of the chain.
    """

    f_embed: tuple[int, ...]
    h: FinGenMetric


@dataclass(frozen=True)
class TaskRecord:
    kind: str
    payload: Union[KatetovFn, Extension]
    stage_index: int
    verification_radius: Optional[Fraction] = None

    def describe(self) -> str:
        if self.kind == KATETOV:
            rank = self.payload.base.rank
            body = ", ".join(f"{list(a.dense(rank))}:{format_rational(v)}" for a, v in self.payload.values.items())
            return f"katetov over stage {self.stage_index} {{{body}}}"
        return f"amalgam over stage {self.stage_index} F={list(self.payload.f_embed)} rank {self.payload.h.rank}"


@dataclass(frozen=True)
class Chain:
    stages: tuple[FinGenMetric, ...]
    step_log: tuple[TaskRecord, ...] = ()

    @property
    def last(self) -> FinGenMetric:
        return self.stages[-1]

    def __len__(self) -> int:
        return len(self.stages)


def new_chain(seed: Optional[FinGenMetric] = None) -> Chain:
    return Chain((seed if seed is not None else normalize([], 0),))


def katetov_task(stage_index: int, f: KatetovFn, radius=None) -> TaskRecord:
    return TaskRecord(KATETOV, f, stage_index, None if radius is None else Fraction(radius))


def amalgam_task(stage_index: int, f_embed, h: FinGenMetric, radius=None) -> TaskRecord:
    return TaskRecord(AMALGAM, Extension(tuple(f_embed), h), stage_index, None if radius is None else Fraction(radius))


def run_step(c: Chain, t: TaskRecord) -> Chain:
    """Append the stage realizing ``t``; the logged record carries the radius actually used."""
    if not 0 <= t.stage_index < len(c.stages):
        raise IndexError(f"no stage {t.stage_index}")
    last = c.last
    if t.kind == KATETOV:
        f = t.payload
        if f.base != c.stages[t.stage_index]:
            raise RankMismatch(f"Katětov payload is not over stage {t.stage_index}")
        r = t.verification_radius
        if r is None:
            r = default_radius(f.lift(last))
        new = katetov_extend(f, r, over=last)
    elif t.kind == AMALGAM:
        ext = t.payload
        base_rank = c.stages[t.stage_index].rank
        if any(not 0 <= j < base_rank for j in ext.f_embed):
            raise RankMismatch(f"F is not inside stage {t.stage_index}")
        r = t.verification_radius
        if r is None:
            r = 2 * max(last.max_weight, ext.h.max_weight)
        new = extend_over(last, list(ext.f_embed), ext.h, r)
    else:
        raise ValueError(f"unknown task kind {t.kind!r}")
    rec = TaskRecord(t.kind, t.payload, t.stage_index, Fraction(r))
    return Chain(c.stages + (new,), c.step_log + (rec,))


def replay(seed: FinGenMetric, log) -> Chain:
    c = new_chain(seed)
    for t in log:
        c = run_step(c, t)
    return c


def coherence_mismatch(c: Chain) -> Optional[tuple[int, LatticeVector]]:
    """First step whose new stage does not restrict to its predecessor on the recorded ball."""
    for i, t in enumerate(c.step_log):
        prev, cur = c.stages[i], c.stages[i + 1]
        bad = restriction_mismatch(cur, prev, list(range(prev.rank)), t.verification_radius)
        if bad is not None:
            return i, bad
    return None


# -- task enumeration ------------------------------------------------------------


def task_values(bound: int) -> list[Fraction]:
    return sorted({Fraction(p, q) for p in range(1, bound + 1) for q in range(1, bound + 1)})


def enumerate_tasks(c: Chain, bound: int, stage_index: int = -1) -> list[TaskRecord]:
    """All valid Katětov tasks over one stage within ``bound``.

    Domain points have l1 norm at most ``bound``, values are ``p/q`` with
    ``1 <= p, q <= bound`` and domains have at most ``bound`` points.  Order:
    by domain size, then domains lexicographically in the graded point order,
    then value tuples lexicographically in increasing value order.
    """
    if bound < 1:
        return []
    idx = stage_index % len(c.stages)
    stage = c.stages[idx]
    points = list(l1_ball(stage.rank, bound))
    values = task_values(bound)
    out = []
    for size in range(1, bound + 1):
        for dom in combinations(points, size):
            for vals in product(values, repeat=size):
                f = KatetovFn(stage, dict(zip(dom, vals)))
                if validate_katetov(f):
                    out.append(TaskRecord(KATETOV, f, idx))
    return out


def realizes(stage: FinGenMetric, f: KatetovFn, x: LatticeVector) -> bool:
    return all(evaluate_capped(stage, x - a, v) == v for a, v in f.values.items())


def find_realizer(stage: FinGenMetric, f: KatetovFn, search_radius: int = 1) -> Optional[LatticeVector]:
    """First ``x`` with ``|x|_1 <= search_radius`` (graded order) realizing ``f`` in ``stage``."""
    for x in l1_ball(stage.rank, search_radius):
        if realizes(stage, f, x):
            return x
    return None


@dataclass
class ExtensionReport:
    realized: list[tuple[TaskRecord, LatticeVector]] = field(default_factory=list)
    unrealized: list[TaskRecord] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.unrealized


def check_extension_property(
    c: Chain, bound: int, stage_index: int = 0, search_radius: int = 1
) -> ExtensionReport:
    """Look for a realizer in the last stage of every task within ``bound`` over ``stage_index``."""
    report = ExtensionReport()
    last = c.last
    for t in enumerate_tasks(c, bound, stage_index):
        x = find_realizer(last, t.payload.lift(last), search_radius)
        if x is None:
            report.unrealized.append(t)
        else:
            report.realized.append((t, x))
    return report


@dataclass
class ServiceLog:
    ran: list[TaskRecord] = field(default_factory=list)
    skipped: list[tuple[TaskRecord, LatticeVector]] = field(default_factory=list)


def service(
    c: Chain,
    bound: int,
    stage_index: int = 0,
    radius: Fraction | int | None = None,
    search_radius: int = 1,
    rounds: int = 1,
) -> tuple[Chain, ServiceLog]:
    """Realize every task within ``bound`` that the chain does not already realize.

    Each round enumerates tasks over the stage at ``stage_index`` (the first
    round) or over the last stage of the previous round, breadth first.  A
    task is skipped when an existing element realizes it.
    """
    log = ServiceLog()
    idx = stage_index % len(c.stages)
    for _ in range(rounds):
        for t in enumerate_tasks(c, bound, idx):
            last = c.last
            x = find_realizer(last, t.payload.lift(last), search_radius)
            if x is not None:
                log.skipped.append((t, x))
                continue
            c = run_step(c, TaskRecord(t.kind, t.payload, t.stage_index, radius))
            log.ran.append(c.step_log[-1])
        idx = len(c.stages) - 1
    return c, log


# -- persistence ------------------------------------------------------------------


def stage_digest(m: FinGenMetric) -> str:
    return hashlib.sha256(write_metric(m).encode()).hexdigest()


def save(c: Chain) -> str:
    out = ["chain v1", "seed"]
    out += write_metric(c.stages[0]).splitlines()
    out.append("end")
    for t in c.step_log:
        r = format_rational(t.verification_radius)
        out.append(f"task {t.kind} stage {t.stage_index} radius {r}")
        if t.kind == KATETOV:
            out += write_points(t.payload.values, t.payload.base.rank)
        else:
            out.append("embed " + " ".join(str(j) for j in t.payload.f_embed))
            out += write_metric(t.payload.h).splitlines()
        out.append("end")
    for i, m in enumerate(c.stages):
        out.append(f"digest {i} {stage_digest(m)}")
    return "\n".join(out) + "\n"


def load(text: str) -> Chain:
    """Parse a ``chain v1`` text, replay its log and check the stage digests."""
    lines = Lines(text)
    lines.expect("chain", "v1")
    lines.expect("seed")
    seed = _metric_block(lines)
    lines.expect("end")
    c = new_chain(seed)
    while (item := lines.peek()) is not None and item[1][0] == "task":
        no, toks = lines.next("task")
        if len(toks) != 6 or toks[2] != "stage" or toks[4] != "radius" or toks[1] not in (KATETOV, AMALGAM):
            raise ParseError("expected 'task <kind> stage <i> radius <r>'", no)
        try:
            idx = int(toks[3])
        except ValueError:
            raise ParseError(f"bad stage index {toks[3]!r}", no) from None
        if not 0 <= idx < len(c.stages):
            raise ParseError(f"task refers to missing stage {idx}", no)
        r = _rational(toks[5], no)
        base = c.stages[idx]
        if toks[1] == KATETOV:
            t = TaskRecord(KATETOV, KatetovFn(base, read_points(lines, base.rank)), idx, r)
        else:
            eno, emb = lines.expect("embed")
            try:
                f_embed = tuple(int(j) for j in emb)
            except ValueError:
                raise ParseError("embed expects coordinate indices", eno) from None
            t = TaskRecord(AMALGAM, Extension(f_embed, _metric_block(lines)), idx, r)
        lines.expect("end")
        try:
            c = run_step(c, t)
        except ParseError:
            raise
        except Exception as exc:
            raise ParseError(f"replaying task failed: {exc}", no) from exc
    seen = 0
    while not lines.done():
        no, toks = lines.expect("digest")
        if len(toks) != 2 or toks[0] != str(seen):
            raise ParseError(f"expected 'digest {seen} <sha256>'", no)
        if seen >= len(c.stages):
            raise ParseError("more digests than stages", no)
        if stage_digest(c.stages[seen]) != toks[1]:
            raise ParseError(f"stage {seen} does not match its digest", no)
        seen += 1
    if seen != len(c.stages):
        last = lines.items[-1][0] if lines.items else 0
        raise ParseError(f"expected {len(c.stages)} digests, found {seen}", last + 1)
    return c


def _metric_block(lines: Lines) -> FinGenMetric:
    item = lines.peek()
    try:
        return read_metric(lines)
    except ParseError:
        raise
    except Exception as exc:
        raise ParseError(f"invalid metric: {exc}", item[0] if item else None) from exc


def _rational(tok: str, no: int) -> Fraction:
    from .vectors import parse_rational

    try:
        return parse_rational(tok)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"not an exact rational: {tok!r}", no) from None
