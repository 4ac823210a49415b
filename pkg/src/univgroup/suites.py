"""Seeded random instances and brute-force oracles for verification suites.

The oracles here share no code with the search engine in
:mod:`univgroup.wordmetric`; they are deliberately simple and slow.
"""

from __future__ import annotations

import random
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from math import lcm
from typing import Iterable, Optional

from .amalgam import AmalgamSpec, amalgamate, split_norm
from .approx import NormOracle, approximate, min_ratio, rationalize
from .embed import embed_group, verify_embedding
from .errors import KatetovViolation
from .fraisse import coherence_mismatch, find_realizer, katetov_task, load, new_chain, run_step, save
from .katetov import KatetovFn, default_radius, katetov_extend, validate_katetov
from .vectors import LatticeVector, l1_ball
from .wordmetric import (
    FinGenMetric,
    ball,
    evaluate,
    normalize,
    prune,
    restriction_mismatch,
    spans_lattice,
    stable_norm_lp,
)


# -- random instances ----------------------------------------------------------------


def random_weight(rng: random.Random, top: int = 8) -> Fraction:
    """``p/q`` with ``1 <= p, q <= top``."""
    return Fraction(rng.randint(1, top), rng.randint(1, top))


def random_vector(rng: random.Random, rank: int, spread: int = 1) -> LatticeVector:
    while True:
        v = LatticeVector.from_dense([rng.randint(-spread, spread) for _ in range(rank)])
        if not v.is_zero():
            return v


def random_metric(
    rng: random.Random,
    max_rank: int = 3,
    max_orbits: int = 5,
    top: int = 8,
    spread: int = 1,
    rank: Optional[int] = None,
    max_ratio: Optional[Fraction] = None,
) -> FinGenMetric:
    """A spanning metric with at most ``max_orbits`` generator pairs.

    With ``max_ratio`` the weights are redrawn until the largest is at most
    ``max_ratio`` times the smallest, which bounds the size of balls whose
    radius is a multiple of the largest weight.
    """
    n = rng.randint(1, max_rank) if rank is None else rank
    available = ((2 * spread + 1) ** n - 1) // 2  # nonzero vectors up to sign
    while True:
        k = rng.randint(n, max(n, min(max_orbits, available)))
        vecs: dict[LatticeVector, None] = {}
        while len(vecs) < k:
            v = random_vector(rng, n, spread)
            if v not in vecs and -v not in vecs:
                vecs[v] = None
        if not spans_lattice(list(vecs) + [-v for v in vecs], n):
            continue
        while True:
            ws = [random_weight(rng, top) for _ in vecs]
            if max_ratio is None or max(ws) <= max_ratio * min(ws):
                return normalize(list(zip(vecs, ws)), n)


def katetov_candidates(rng: random.Random, base: FinGenMetric, norms, max_size: int = 3, spread: int = 2):
    """Random ``(domain, values)`` drawn so that most are Katětov.

    Values are ``delta(a - c) + t`` for a random centre ``c`` and slack
    ``t > 0`` (always Katětov), sometimes perturbed to produce boundary and
    invalid cases.  ``norms`` evaluates the base metric.
    """
    size = rng.randint(1, max_size)
    pts = list(l1_ball(base.rank, spread))
    dom = rng.sample(pts, min(size, len(pts)))
    centre = rng.choice(pts)
    slack = Fraction(rng.randint(0, 4), rng.randint(1, 4))
    values = {}
    for a in dom:
        v = norms(a - centre) + slack
        if rng.random() < 0.2:
            v += Fraction(rng.randint(-2, 2), rng.randint(1, 4))
        values[a] = v if v > 0 else Fraction(1, 2)
    return values


# -- brute-force oracles ---------------------------------------------------------------


def decomposition_table(
    m: FinGenMetric, cap: Fraction, reach: Optional[int] = None
) -> dict[LatticeVector, Fraction]:
    """Least cost of every integer combination of generator orbits costing at most ``cap``.

    Orbits are added one at a time; for each orbit every coefficient whose
    cost fits under the cap is tried.  Any decomposition can be reordered
    orbit by orbit and its partial costs stay below its total, so each point
    with norm at most ``cap`` appears with its exact norm.

    With ``reach``, only points with ``|x|_1 <= reach`` are wanted: a partial
    sum ``q`` is dropped once the remaining orbits cannot bring it back into
    that l1 ball within the cap.
    """
    orbits = sorted(m.orbits(), key=lambda g: -g.weight)
    scale = lcm(*(g.weight.denominator for g in orbits)) if orbits else 1
    c = (Fraction(cap) * scale).__floor__()
    # cheapest l1 progress per unit of cost among the orbits still to come
    rates = [min((Fraction(int(g.weight * scale), g.vector.l1) for g in orbits[j:]), default=None)
             for j in range(len(orbits) + 1)]
    table: dict[tuple[int, ...], int] = {tuple([0] * m.rank): 0}
    for j, g in enumerate(orbits):
        w = int(g.weight * scale)
        vec = g.vector.dense(m.rank)
        rate = rates[j + 1]
        nxt: dict[tuple[int, ...], int] = {}
        for p, cost in table.items():
            for k in range(-((c - cost) // w), (c - cost) // w + 1):
                q = tuple(a + k * b for a, b in zip(p, vec))
                total = cost + abs(k) * w
                if reach is not None:
                    excess = sum(abs(a) for a in q) - reach
                    if excess > 0 and (rate is None or total + excess * rate > c):
                        continue
                old = nxt.get(q)
                if old is None or total < old:
                    nxt[q] = total
        table = nxt
    return {LatticeVector.from_dense(p): Fraction(v, scale) for p, v in table.items()}


def brute_force_norms(m: FinGenMetric, targets: Iterable[LatticeVector]) -> dict[LatticeVector, Fraction]:
    """Exact norms of ``targets`` from :func:`decomposition_table`, doubling the cap as needed."""
    targets = list(targets)
    out: dict[LatticeVector, Fraction] = {}
    cap = 2 * m.max_weight if m.generators else Fraction(1)
    reach = max((x.l1 for x in targets), default=0)
    while True:
        table = decomposition_table(m, cap, reach)
        missing = []
        for x in targets:
            if x in table:
                out[x] = table[x]
            else:
                missing.append(x)
        if not missing:
            return out
        targets = missing
        cap *= 2


def brute_force_lp(columns: list[list[int]], costs: list[Fraction], b: list[int]) -> Fraction:
    """``min c . lam`` over ``lam >= 0`` with ``A lam = b`` by enumerating basic feasible solutions.

    Solves every square subsystem on ``rank`` columns by exact Gaussian
    elimination.  Requires the columns to span, which negation-closed
    spanning generator sets guarantee.
    """
    n = len(b)
    best: Optional[Fraction] = None
    for basis in combinations(range(len(columns)), n):
        sol = _solve([[Fraction(columns[j][i]) for j in basis] for i in range(n)], [Fraction(v) for v in b])
        if sol is None or any(v < 0 for v in sol):
            continue
        value = sum((costs[j] * v for j, v in zip(basis, sol)), Fraction(0))
        if best is None or value < best:
            best = value
    if best is None:
        raise ValueError("no basic feasible solution")
    return best


def _solve(a: list[list[Fraction]], b: list[Fraction]) -> Optional[list[Fraction]]:
    n = len(b)
    rows = [r[:] + [v] for r, v in zip(a, b)]
    for col in range(n):
        piv = next((r for r in range(col, n) if rows[r][col] != 0), None)
        if piv is None:
            return None
        rows[col], rows[piv] = rows[piv], rows[col]
        for r in range(n):
            if r != col and rows[r][col] != 0:
                f = rows[r][col] / rows[col][col]
                rows[r] = [x - f * y for x, y in zip(rows[r], rows[col])]
    return [rows[i][n] / rows[i][i] for i in range(n)]


def brute_force_min_ratio(k: int, x: LatticeVector) -> Fraction:
    """Inner minimum of ``B_k`` by trying every ``l <= 2|x|_1`` and every ``y`` in the cube."""
    n = max((i for i, _ in x.items()), default=-1) + 1
    best = None
    for l in range(1, 2 * x.l1 + 1):
        for ys in product(range(-k, k + 1), repeat=n):
            y = LatticeVector.from_dense(ys)
            if (y * l).l1 > 2 * x.l1:
                continue
            r = Fraction((x - y * l).l1, x.l1)
            if best is None or r < best:
                best = r
    return best


# -- reusable checks -------------------------------------------------------------------
#
# Each returns ``None`` when the property holds and a short description of the
# first violation otherwise.


def oracle_mismatch(m: FinGenMetric, R: int = 6) -> Optional[str]:
    """``evaluate`` against :func:`brute_force_norms` on every ``|x|_1 <= R``."""
    pts = list(l1_ball(m.rank, R))
    want = brute_force_norms(m, pts)
    for x in pts:
        got = evaluate(m, x)
        if got != want[x]:
            return f"delta({list(x.dense(m.rank))}) = {got}, brute force {want[x]}"
    return None


def axiom_violation(m: FinGenMetric, r: Fraction) -> Optional[str]:
    """Identity, symmetry and the triangle inequality on ``ball(m, r)``.

    For ``y, z`` in the ball the triangle inequality at ``x = y + z`` is
    only in doubt when ``delta(y) + delta(z) <= r``: otherwise any ``x`` in
    the ball already has ``delta(x) <= r < delta(y) + delta(z)``.  Those
    pairs are checked one by one, and ``x`` must then lie in the ball.
    """
    b = ball(m, r)
    if b.get(LatticeVector()) != 0:
        return "delta(0) is not 0"
    for x, d in b.items():
        if not x.is_zero() and d <= 0:
            return f"delta({x}) = {d} for a nonzero vector"
        if b.get(-x) != d:
            return f"delta({x}) != delta(-{x})"
    by_norm = sorted(b.items(), key=lambda kv: kv[1])
    norms = [d for _, d in by_norm]
    for y, dy in by_norm:
        for z, dz in by_norm[: bisect_right(norms, r - dy)]:
            dx = b.get(y + z)
            if dx is None or dx > dy + dz:
                return f"triangle fails at {y} + {z}"
    return None


def katetov_violation(base: FinGenMetric, values: dict, radius: Optional[Fraction] = None) -> Optional[str]:
    """Extension checks for one Katětov function, re-derived outside :func:`katetov_extend`."""
    f = KatetovFn(base, values)
    if not validate_katetov(f):
        try:
            katetov_extend(f)
        except KatetovViolation:
            return None
        return "invalid function was accepted"
    r = default_radius(f) if radius is None else Fraction(radius)
    ext = katetov_extend(f, r)
    if any(not isinstance(g.weight, Fraction) for g in ext.generators):
        return "non-rational weight"
    bad = restriction_mismatch(ext, base, list(range(base.rank)), r)
    if bad is not None:
        return f"restriction differs at {bad}"
    z = LatticeVector.unit(base.rank)
    for a, fa in values.items():
        got = evaluate(ext, z - a)
        if got != fa:
            return f"d(z, {a}) = {got}, expected {fa}"
    return None


def random_katetov(
    rng: random.Random, base: FinGenMetric, max_size: int = 3, cap: Optional[Fraction] = None
) -> dict:
    """A valid Katětov function on ``base`` with values at most ``cap`` (rejection sampling)."""
    while True:
        values = katetov_candidates(rng, base, lambda v: evaluate(base, v), max_size)
        if cap is not None and max(values.values()) > cap:
            continue
        if validate_katetov(KatetovFn(base, values)):
            return values


def random_stage_over(rng: random.Random, shared: FinGenMetric, steps: int) -> FinGenMetric:
    """``shared`` followed by ``steps`` one-point Katětov extensions, redundant generators pruned."""
    m = shared
    for _ in range(steps):
        if m.rank == 0:
            values = {LatticeVector(): random_weight(rng, 4)}
        else:
            values = random_katetov(rng, m, 2, cap=2 * m.max_weight)
        m = prune(katetov_extend(KatetovFn(m, values), verify=False), keep=[g.vector for g in shared.generators])
    return m


def random_amalgam(rng: random.Random) -> AmalgamSpec:
    """Two random one-point extensions of a common random stage (rank 0 to 2)."""
    s = rng.randint(0, 2)
    shared = normalize([], 0) if s == 0 else random_metric(rng, rank=s, max_orbits=3, top=4, max_ratio=Fraction(4))
    left = random_stage_over(rng, shared, rng.randint(1, 2) if s else 1)
    right = random_stage_over(rng, shared, 1)
    return AmalgamSpec(s, left, right)


def amalgam_violation(spec: AmalgamSpec, radius: Optional[Fraction] = None, split_radius: int = 2) -> Optional[str]:
    """Both inclusions isometric on the ball, and the splitting formula on a small l1 ball."""
    r = spec.default_radius() if radius is None else Fraction(radius)
    out = amalgamate(spec, r)
    for side, mapping, name in ((spec.left, spec.left_map(), "left"), (spec.right, spec.right_map(), "right")):
        bad = restriction_mismatch(out, side, mapping, r)
        if bad is not None:
            return f"{name} inclusion differs at {bad}"
    for v in l1_ball(out.rank, split_radius):
        d = evaluate(out, v)
        s = split_norm(spec, v, d)
        if s != d:
            return f"splitting gives {s} at {v}, amalgam {d}"
    return None


def rationalize_violation(m: FinGenMetric, eps: Fraction, R: int = 6) -> Optional[str]:
    """``d <= d_R <= d + eps |x|_1`` on every ``0 < |x|_1 <= R``."""
    mr = rationalize(m, eps)
    for x in l1_ball(m.rank, R, include_zero=False):
        d, dr = evaluate(m, x), evaluate(mr, x)
        if not d <= dr <= d + eps * x.l1:
            return f"at {x}: d = {d}, d_R = {dr}"
    return None


def approximation_violation(p: NormOracle, eps: Fraction, R: int = 8) -> Optional[str]:
    """``p <= d_F`` and ``|d_F - p| <= eps |x|_1`` on the ball, recomputed independently."""
    dF = approximate(p, eps, radius=R)
    for x in l1_ball(p.rank, R, include_zero=False):
        d, px = evaluate(dF, x), p(x)
        if d < px:
            return f"d_F({x}) = {d} below p = {px}"
        if d - px > eps * x.l1:
            return f"d_F({x}) = {d} exceeds p = {px} by more than eps |x|"
    return None


def embedding_violation(p: NormOracle, depth: int, R: int = 4) -> Optional[str]:
    """Stage links, track distances and the final error bound of :func:`embed_group`."""
    chain, rep = embed_group(p, depth, radius=R)
    for link in rep.stages:
        a = link.prev.rank
        for j in range(a):
            cross = LatticeVector.unit(j) - LatticeVector.unit(a + j)
            if evaluate(link.linked, cross) != link.rho:
                return f"stage link cross distance on coordinate {j}"
    final = chain.last
    for n in range(1, depth):
        for j, t in enumerate(rep.generator_tracks):
            if t[n - 1] is None:
                continue
            d = evaluate(final, LatticeVector.unit(t[n - 1]) - LatticeVector.unit(t[n]))
            if d != rep.schedule.rho(n):
                return f"d(s_{j + 1}^{n}, s_{j + 1}^{n + 1}) = {d}"
    err = verify_embedding(rep, p, R)
    bound = rep.schedule.rho(depth) + rep.schedule.tail(depth)
    if err > bound:
        return f"embedding error {err} above {bound}"
    return None


# -- suites ---------------------------------------------------------------------------


@dataclass
class SuiteReport:
    module: str
    seed: int
    checks: int = 0
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def record(self, problem: Optional[str], label: str) -> None:
        self.checks += 1
        if problem is not None:
            self.failures.append(f"{label}: {problem}")


def suite_wordmetric(seed: int, count: int = 20) -> SuiteReport:
    rng = random.Random(seed)
    rep = SuiteReport("wordmetric", seed)
    for i in range(count):
        m = random_metric(rng, max_ratio=Fraction(4))
        rep.record(oracle_mismatch(m, 4), f"instance {i} oracle")
        rep.record(axiom_violation(m, 2 * m.max_weight), f"instance {i} axioms")
        cols = [g.vector.dense(m.rank) for g in m.generators]
        costs = [g.weight for g in m.generators]
        x = random_vector(rng, m.rank, 2)
        lp, bf = stable_norm_lp(m, x), brute_force_lp(cols, costs, list(x.dense(m.rank)))
        rep.record(None if lp == bf else f"LP {lp}, vertex enumeration {bf}", f"instance {i} stable norm")
    return rep


def suite_katetov(seed: int, count: int = 20) -> SuiteReport:
    rng = random.Random(seed)
    rep = SuiteReport("katetov", seed)
    for i in range(count):
        base = random_metric(rng, max_rank=2, max_orbits=3, top=4, max_ratio=Fraction(4))
        values = katetov_candidates(rng, base, lambda v: evaluate(base, v))
        rep.record(katetov_violation(base, values), f"instance {i}")
    return rep


def suite_amalgam(seed: int, count: int = 10) -> SuiteReport:
    rng = random.Random(seed)
    rep = SuiteReport("amalgam", seed)
    for i in range(count):
        rep.record(amalgam_violation(random_amalgam(rng)), f"instance {i}")
    return rep


def suite_fraisse(seed: int, count: int = 4) -> SuiteReport:
    rng = random.Random(seed)
    rep = SuiteReport("fraisse", seed)
    c = new_chain(normalize([(LatticeVector.of(1), 1)], 1))
    for _ in range(count):
        base = c.last
        c = run_step(c, katetov_task(len(c.stages) - 1, KatetovFn(base, random_katetov(rng, base, 2))))
        realized = find_realizer(c.last, c.step_log[-1].payload.lift(c.last), 1)
        rep.record(None if realized is not None else "task not realized", f"step {len(c.step_log)}")
    bad = coherence_mismatch(c)
    rep.record(None if bad is None else f"step {bad[0]} at {bad[1]}", "coherence")
    again = load(save(c))
    rep.record(None if again == c else "load(save(c)) differs", "round trip")
    return rep


def suite_approx(seed: int, count: int = 4) -> SuiteReport:
    rng = random.Random(seed)
    rep = SuiteReport("approx", seed)
    for i in range(count):
        m = random_metric(rng, max_rank=2, max_orbits=3, top=4, max_ratio=Fraction(2))
        eps = Fraction(1, 2)
        rep.record(approximation_violation(NormOracle.from_metric(m), eps), f"instance {i} approximate")
        rep.record(rationalize_violation(m, eps), f"instance {i} rationalize")
        x = random_vector(rng, 2, 3)
        k = rng.randint(1, 2)
        got, want = min_ratio(2, k, x), brute_force_min_ratio(k, x)
        rep.record(None if got == want else f"{got} vs {want}", f"instance {i} min_ratio")
    return rep


def suite_embed(seed: int, count: int = 2) -> SuiteReport:
    rng = random.Random(seed)
    rep = SuiteReport("embed", seed)
    for i in range(count):
        m = random_metric(rng, rank=2, max_orbits=3, top=4, max_ratio=Fraction(2))
        rep.record(embedding_violation(NormOracle.from_metric(m), 3), f"instance {i}")
    return rep


SUITES = {
    "wordmetric": suite_wordmetric,
    "katetov": suite_katetov,
    "amalgam": suite_amalgam,
    "fraisse": suite_fraisse,
    "approx": suite_approx,
    "embed": suite_embed,
}
