"""Finitely generated invariant metrics on free abelian groups.

A metric on ``Z^n`` generated by finitely many prescribed distances is stored in
norm form: a negation-closed set of weighted difference vectors.  The norm of
``x`` is the cheapest way to write ``x`` as a sum of generator vectors, which
is a shortest path from ``0`` to ``x`` in the weighted Cayley graph.

All arithmetic is exact.  Internally the weights are scaled to integers by the
least common multiple of their denominators and lattice points are packed into
Python integers, so the search runs on plain ``int`` keys.
"""

from __future__ import annotations

import heapq
import os
import threading
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Iterable, Optional

from .errors import NotSpanning, RankMismatch, ResourceLimit, ZeroWeightNonzeroVector
from .vectors import LatticeVector, VectorLike, as_vector, l1_ball

DEFAULT_NODE_BUDGET = 3_000_000
NODE_BUDGET_ENV = "UNIVGROUP_NODE_BUDGET"

_SHIFT = 48
_BASE = 1 << _SHIFT
_HALF = _BASE >> 1
_MASK = _BASE - 1


def node_budget() -> int:
    raw = os.environ.get(NODE_BUDGET_ENV)
    return int(raw) if raw else DEFAULT_NODE_BUDGET


def _encode(v: LatticeVector) -> int:
    code = 0
    for i, c in v.items():
        code += c << (_SHIFT * i)
    return code


def _decode(code: int, rank: int) -> LatticeVector:
    items = []
    for i in range(rank):
        c = code & _MASK
        if c >= _HALF:
            c -= _BASE
        if c:
            items.append((i, c))
        code = (code - c) >> _SHIFT
    if code:
        raise OverflowError("lattice code outside the declared rank")
    return LatticeVector(items)


@dataclass(frozen=True, order=True)
class WeightedGenerator:
    vector: LatticeVector
    weight: Fraction

    def __post_init__(self):
        if self.vector.is_zero():
            raise ValueError("generator vector must be nonzero")
        if self.weight <= 0:
            raise ValueError("generator weight must be positive")


class FinGenMetric:
    """An invariant metric on ``Z^rank`` given by weighted generators.

    Instances are immutable and should be built with :func:`normalize`, which
    enforces negation closure, duplicate collapse and spanning.  Distances are
    computed lazily and cached behind a lock, so a metric can be shared freely.
    """

    def __init__(self, rank: int, generators: Iterable[WeightedGenerator]):
        self.rank = rank
        self.generators: tuple[WeightedGenerator, ...] = tuple(
            sorted(generators, key=lambda g: (g.vector.sort_key(), g.weight))
        )
        self._lock = threading.Lock()
        self._engine: Optional[_Explorer] = None
        self._duals: Optional[_DualPool] = None
        self._relaxed: dict[LatticeVector, Fraction] = {}

    def __eq__(self, other) -> bool:
        if not isinstance(other, FinGenMetric):
            return NotImplemented
        return self.rank == other.rank and self.generators == other.generators

    def __hash__(self) -> int:
        return hash((self.rank, self.generators))

    def __repr__(self) -> str:
        return f"FinGenMetric(rank={self.rank}, generators={len(self.generators)})"

    @property
    def weights(self) -> dict[LatticeVector, Fraction]:
        return {g.vector: g.weight for g in self.generators}

    @property
    def min_weight(self) -> Fraction:
        return min(g.weight for g in self.generators)

    @property
    def max_weight(self) -> Fraction:
        return max((g.weight for g in self.generators), default=Fraction(0))

    def orbits(self) -> list[WeightedGenerator]:
        """One representative per {g, -g} pair: the one whose first entry is positive."""
        return [g for g in self.generators if g.vector.items()[0][1] > 0]

    def check_vector(self, x: VectorLike) -> LatticeVector:
        x = as_vector(x)
        if x.support_size > self.rank:
            raise RankMismatch(f"{x} does not live in Z^{self.rank}")
        return x

    def engine(self) -> "_Explorer":
        if self._engine is None:
            self._engine = _Explorer(self)
        return self._engine

    def dual_pool(self) -> "_DualPool":
        if self._duals is None:
            self._duals = _DualPool(self)
        return self._duals

    def __call__(self, x: VectorLike) -> Fraction:
        return evaluate(self, x)


@dataclass
class OptimalDecomposition:
    target: LatticeVector
    parts: list[WeightedGenerator]
    total: Fraction


@dataclass
class StableNormEstimate:
    value_upper: Fraction
    samples: list[tuple[int, Fraction]]
    value_lp: Optional[Fraction] = None


# -- construction -------------------------------------------------------------


def normalize(raw: Iterable[tuple[VectorLike, Fraction | int | str]], rank: Optional[int] = None) -> FinGenMetric:
    """Build a metric from ``(vector, weight)`` pairs.

    Adds negations, drops ``(0, 0)`` entries, keeps the minimum weight for
    repeated vectors and checks that the vectors span ``Z^rank``.
    """
    best: dict[LatticeVector, Fraction] = {}
    inferred = 0
    for vec, w in raw:
        v = as_vector(vec)
        w = Fraction(w)
        if w < 0:
            raise ValueError(f"negative weight {w} for {v}")
        if v.is_zero() and w != 0:
            raise ZeroWeightNonzeroVector(f"zero vector with weight {w}")
        if w == 0 and not v.is_zero():
            raise ZeroWeightNonzeroVector(f"nonzero vector {list(v.dense(v.support_size))} with weight 0")
        if v.is_zero():
            continue
        inferred = max(inferred, v.support_size)
        for u in (v, -v):
            if u not in best or w < best[u]:
                best[u] = w
    if rank is None:
        rank = inferred
    elif inferred > rank:
        raise RankMismatch(f"generator outside Z^{rank}")
    if not spans_lattice(best, rank):
        raise NotSpanning(f"generators do not span Z^{rank}")
    return FinGenMetric(rank, (WeightedGenerator(v, w) for v, w in best.items()))


def spans_lattice(vectors: Iterable[LatticeVector], rank: int) -> bool:
    """Whether the integer span of ``vectors`` is all of ``Z^rank``."""
    rows = [list(v.dense(rank)) for v in vectors]
    for col in range(rank):
        live = [r for r in rows if r[col]]
        rest = [r for r in rows if not r[col]]
        if not live:
            return False
        # Euclid on column ``col`` until a single row carries it.
        while len(live) > 1:
            live.sort(key=lambda r: abs(r[col]))
            pivot = live[0]
            nxt = [pivot]
            for r in live[1:]:
                q = r[col] // pivot[col]
                r = [a - q * b for a, b in zip(r, pivot)]
                (nxt if r[col] else rest).append(r)
            live = nxt
        if abs(live[0][col]) != 1:
            return False
        rows = rest
    return True


def restrict(m: FinGenMetric, coords: list[int]) -> list[WeightedGenerator]:
    """Generators of ``m`` supported on ``coords`` (not the restricted metric)."""
    allowed = set(coords)
    return [g for g in m.generators if all(i in allowed for i, _ in g.vector.items())]


def permute(m: FinGenMetric, perm: list[int]) -> FinGenMetric:
    """Relabel coordinate ``i`` as ``perm[i]``; ``perm`` must be a permutation."""
    if sorted(perm) != list(range(m.rank)):
        raise ValueError("not a permutation of the coordinates")
    return FinGenMetric(m.rank, (WeightedGenerator(g.vector.remap(perm), g.weight) for g in m.generators))


def embed_generators(m: FinGenMetric, mapping: list[int]) -> list[tuple[LatticeVector, Fraction]]:
    return [(g.vector.remap(mapping), g.weight) for g in m.generators]


# -- search engine ------------------------------------------------------------


class _Explorer:
    """Incremental uniform-cost search from 0, shared by every query on a metric.

    Settled points are kept in settling order (nondecreasing distance) so a
    ball is a prefix of ``order``.  Point queries that are not yet settled use
    a meet-in-the-middle split and only need the ball of half the distance.
    """

    def __init__(self, m: FinGenMetric):
        self.rank = m.rank
        self.scale = lcm(*(g.weight.denominator for g in m.generators)) if m.generators else 1
        self.moves = [
            (_encode(g.vector), int(g.weight * self.scale), idx) for idx, g in enumerate(m.generators)
        ]
        self.max_move = max((w for _, w, _ in self.moves), default=0)
        self.min_move = min((w for _, w, _ in self.moves), default=1)
        self.dist: dict[int, int] = {0: 0}
        self.pred: dict[int, tuple[int, int]] = {}
        self.done: set[int] = set()
        self.order: list[int] = []
        self.order_d: list[int] = []
        self.heap: list[tuple[int, int]] = [(0, 0)]
        self.radius = -1
        self.budget = node_budget()

    def settle_through(self, r: int) -> None:
        if r <= self.radius:
            return
        heap, dist, done, pred = self.heap, self.dist, self.done, self.pred
        order, order_d, moves = self.order, self.order_d, self.moves
        pop, push = heapq.heappop, heapq.heappush
        while heap and heap[0][0] <= r:
            d, c = pop(heap)
            if c in done:
                continue
            done.add(c)
            order.append(c)
            order_d.append(d)
            if len(order) > self.budget:
                raise ResourceLimit(
                    f"search settled more than {self.budget} points (set {NODE_BUDGET_ENV} to raise)"
                )
            for mc, mw, gi in moves:
                nc = c + mc
                nd = d + mw
                old = dist.get(nc)
                if old is None or nd < old:
                    dist[nc] = nd
                    pred[nc] = (c, gi)
                    push(heap, (nd, nc))
        self.radius = r

    def point(self, code: int) -> tuple[int, int]:
        """Scaled distance of ``code`` and the settled split point used for it."""
        if code in self.done:
            return self.dist[code], code
        while True:
            mu, split = self._best_split(code)
            if mu is not None and mu <= 2 * self.radius:
                return mu, split
            if mu is None:
                target = 0 if self.radius < 0 else max(2 * self.radius, self.min_move)
            else:
                target = (mu + 1) // 2
            self.settle_through(target)
            if code in self.done:
                return self.dist[code], code

    def point_capped(self, code: int, cap: int) -> Optional[int]:
        """Scaled distance of ``code`` if it is at most ``cap``, else ``None``.

        Settles only through ``ceil(cap / 2)``: a point within ``cap`` always
        splits into two halves that the split search sees exactly.
        """
        if code in self.done:
            d = self.dist[code]
            return d if d <= cap else None
        if cap < 0:
            return None
        self.settle_through(max((cap + 1) // 2, self.radius))
        mu, _ = self._best_split(code)
        return mu if mu is not None and mu <= cap else None

    def _best_split(self, code: int) -> tuple[Optional[int], int]:
        dist = self.dist
        mu = dist.get(code)
        split = code
        order, order_d = self.order, self.order_d
        for k in range(len(order)):
            du = order_d[k]
            if mu is not None and 2 * du > mu:
                break
            rest = dist.get(code - order[k])
            if rest is not None and (mu is None or du + rest < mu):
                mu = du + rest
                split = order[k]
        return mu, split

    def path(self, code: int) -> list[int]:
        """Generator indices along the recorded predecessor chain to ``code``."""
        out = []
        while code != 0:
            code, gi = self.pred[code]
            out.append(gi)
        return out


def _scaled(m: FinGenMetric, r: Fraction) -> int:
    eng = m.engine()
    s = Fraction(r) * eng.scale
    return s.numerator // s.denominator


# -- operations -----------------------------------------------------------------


def evaluate(m: FinGenMetric, x: VectorLike) -> Fraction:
    """Norm ``delta(x)``: least total weight of generators summing to ``x``."""
    x = m.check_vector(x)
    with m._lock:
        eng = m.engine()
        d, _ = eng.point(_encode(x))
    return Fraction(d, eng.scale)


def evaluate_capped(m: FinGenMetric, x: VectorLike, cap: Fraction | int) -> Optional[Fraction]:
    """``delta(x)`` when it is at most ``cap``; ``None`` otherwise.

    Cheaper than :func:`evaluate` for far points: only the ball of radius
    ``cap / 2`` is explored.
    """
    x = m.check_vector(x)
    with m._lock:
        eng = m.engine()
        d = eng.point_capped(_encode(x), _scaled(m, Fraction(cap)))
    return None if d is None else Fraction(d, eng.scale)


def distance(m: FinGenMetric, a: VectorLike, b: VectorLike) -> Fraction:
    return evaluate(m, as_vector(a) - as_vector(b))


def optimal_decomposition(m: FinGenMetric, x: VectorLike) -> OptimalDecomposition:
    x = m.check_vector(x)
    with m._lock:
        eng = m.engine()
        code = _encode(x)
        d, split = eng.point(code)
        idx = eng.path(split)
        if split != code:
            idx += eng.path(code - split)
    parts = [m.generators[i] for i in idx]
    parts.sort()
    total = sum((g.weight for g in parts), Fraction(0))
    assert total == Fraction(d, eng.scale)
    return OptimalDecomposition(x, parts, total)


def ball(m: FinGenMetric, r: Fraction | int) -> dict[LatticeVector, Fraction]:
    """Every ``x`` with ``delta(x) <= r``, mapped to ``delta(x)``."""
    r = Fraction(r)
    if r < 0:
        raise ValueError("radius must be nonnegative")
    with m._lock:
        eng = m.engine()
        rs = _scaled(m, r)
        eng.settle_through(rs)
        n = bisect_right(eng.order_d, rs)
        codes = eng.order[:n]
        ds = eng.order_d[:n]
    return {_decode(c, m.rank): Fraction(d, eng.scale) for c, d in zip(codes, ds)}


def ball_size(m: FinGenMetric, r: Fraction | int) -> int:
    with m._lock:
        eng = m.engine()
        rs = _scaled(m, Fraction(r))
        eng.settle_through(rs)
        return bisect_right(eng.order_d, rs)


def restricted_ball(
    m: FinGenMetric, mapping: list[int], r: Fraction | int
) -> dict[LatticeVector, Fraction]:
    """``ball(m, r)`` cut down to the subgroup spanned by the coordinates in ``mapping``.

    Points are reported in the subgroup's own coordinates: ``mapping[i]`` is
    the coordinate of ``m`` carrying coordinate ``i`` of the subgroup.
    """
    inverse = {j: i for i, j in enumerate(mapping)}
    out = {}
    for x, d in ball(m, r).items():
        if all(i in inverse for i, _ in x.items()):
            out[x.remap(inverse)] = d
    return out


def restriction_mismatch(
    big: FinGenMetric, small: FinGenMetric, mapping: list[int], r: Fraction | int
) -> Optional[LatticeVector]:
    """First point (graded order) where ``big`` along ``mapping`` and ``small`` differ.

    Both balls of radius ``r`` are compared exactly; ``None`` means they agree.
    """
    return ball_mismatch(restricted_ball(big, mapping, r), ball(small, r))


def ball_mismatch(
    a: dict[LatticeVector, Fraction], b: dict[LatticeVector, Fraction]
) -> Optional[LatticeVector]:
    bad = [x for x in a.keys() | b.keys() if a.get(x) != b.get(x)]
    return min(bad, key=LatticeVector.sort_key) if bad else None


def d_distance_ball(m1: FinGenMetric, m2: FinGenMetric, R: int) -> Fraction:
    """``max |d1(x) - d2(x)| / |x|_1`` over ``0 < |x|_1 <= R``.

    The supremum over the whole lattice can only be larger, so this is a lower
    bound for the distance between the two metrics.
    """
    return d_distance_witness(m1, m2, R)[0]


def d_distance_witness(m1: FinGenMetric, m2: FinGenMetric, R: int) -> tuple[Fraction, Optional[LatticeVector]]:
    if m1.rank != m2.rank:
        raise RankMismatch(f"ranks {m1.rank} and {m2.rank} differ")
    if R < 1:
        raise ValueError("R must be at least 1")
    worst, witness = Fraction(0), None
    for x in l1_ball(m1.rank, R, include_zero=False):
        ratio = abs(evaluate(m1, x) - evaluate(m2, x)) / x.l1
        if ratio > worst:
            worst, witness = ratio, x
    return worst, witness


def evaluate_guided(m: FinGenMetric, x: VectorLike, potential, upper: Fraction | int | None = None) -> Fraction:
    """``delta(x)`` by A* search steered by a linear functional.

    ``potential`` is a vector ``y`` with ``|y . g| <= w_g`` for every
    generator; then ``|y . u| <= delta(u)`` for all ``u`` and the heuristic
    ``|y . (x - v)|`` is consistent, so the result is exact whatever ``y`` is.
    A ``y`` that is nearly tight along ``x`` (an optimal dual of the stable
    norm linear program) confines the search to a thin slab of the ball.
    A known ``upper >= delta(x)`` (from any decomposition) prunes every
    point whose estimate exceeds it.
    """
    x = m.check_vector(x)
    y = [Fraction(c) for c in potential]
    if len(y) != m.rank:
        raise RankMismatch("potential has the wrong length")
    if x.is_zero():
        return Fraction(0)
    eng = m.engine()
    den = lcm(*(c.denominator for c in y)) if y else 1
    scale = eng.scale * den
    Y = [int(c * scale) for c in y]

    def dot(v: LatticeVector) -> int:
        return sum(Y[i] * c for i, c in v.items())

    moves = []
    for g in m.generators:
        w = int(g.weight * scale)
        yg = dot(g.vector)
        if abs(yg) > w:
            raise ValueError(f"potential is not dominated by the weight of {g.vector}")
        moves.append((_encode(g.vector), w, yg))
    target = _encode(x)
    yx = dot(x)
    cap = None if upper is None else (Fraction(upper) * scale).__floor__()
    best = {0: 0}
    heap = [(abs(yx), 0, 0, 0)]  # (g + h, g, code, y . v)
    closed = set()
    budget = node_budget()
    while heap:
        _, d, c, yv = heapq.heappop(heap)
        if c in closed:
            continue
        if c == target:
            return Fraction(d, scale)
        closed.add(c)
        if len(closed) > budget:
            raise ResourceLimit(f"guided search settled more than {budget} points")
        for mc, mw, yg in moves:
            nc = c + mc
            nd = d + mw
            if nc in closed:
                continue
            old = best.get(nc)
            if old is None or nd < old:
                nyv = yv + yg
                f = nd + abs(yx - nyv)
                if cap is not None and f > cap:
                    continue
                best[nc] = nd
                heapq.heappush(heap, (f, nd, nc, nyv))
    if cap is not None:
        raise ValueError(f"upper bound {upper} is below delta({x})")
    raise NotSpanning("target unreachable")


def evaluate_directed(m: FinGenMetric, x: VectorLike, upper: Fraction | int | None = None) -> Fraction:
    """``delta(x)`` by :func:`evaluate_guided` with the optimal stable norm dual for ``x``.

    Preferable to :func:`evaluate` for far points of metrics with many light
    generators, where the full ball of radius ``delta(x) / 2`` is too large.
    """
    x = m.check_vector(x)
    if x.is_zero():
        return Fraction(0)
    return evaluate_guided(m, x, stable_norm_certificate(m, x).dual, upper)


class _DualPool:
    """Optimal vertices of the stable norm dual program, reused across targets.

    The dual feasible region ``{y : |y . g| <= w_g}`` does not depend on the
    target.  A vertex found for one target stays optimal for any ``r`` whose
    basic solution ``B^{-1} r`` is nonnegative, and its negation for any ``r``
    where it is nonpositive, so most stable norms are read off without a new
    simplex run.
    """

    def __init__(self, m: FinGenMetric):
        self.m = m
        self.vertices: list[tuple[list[int], int, list[list[int]]]] = []  # (y * den, den, B^{-1} * scale)

    def _add(self, lp) -> None:
        if any(j >= len(self.m.generators) for j in lp.basis):
            return  # an artificial column stayed basic; no reusable basis
        d = lcm(*(v.denominator for row in lp.inverse for v in row))
        inverse = [[int(v * d) for v in row] for row in lp.inverse]
        den = lcm(*(v.denominator for v in lp.dual))
        self.vertices.insert(0, ([int(v * den) for v in lp.dual], den, inverse))

    def solve(self, r: LatticeVector, hint=None) -> tuple[Fraction, tuple]:
        """Stable norm of ``r`` and an optimal vertex ``(y * den, den, B^{-1} * scale, sign)``.

        ``hint``, a vertex returned earlier, is tried first.
        """
        if r.is_zero():
            return Fraction(0), ([0] * self.m.rank, 1, [], 1)
        items = r.items()
        if hint is not None and hint[2] and _basic_sign(hint[2], items) == hint[3]:
            return Fraction(hint[3] * sum(hint[0][i] * c for i, c in items), hint[1]), hint
        for k, vertex in enumerate(self.vertices):
            sign = _basic_sign(vertex[2], items)
            if not sign:
                continue
            if k:
                self.vertices.insert(0, self.vertices.pop(k))
            Y, den = vertex[0], vertex[1]
            return Fraction(sign * sum(Y[i] * c for i, c in items), den), (Y, den, vertex[2], sign)
        lp = stable_norm_certificate(self.m, r)
        self._add(lp)
        den = lcm(*(v.denominator for v in lp.dual))
        Y = [int(v * den) for v in lp.dual]
        inverse = self.vertices[0][2] if self.vertices and self.vertices[0][0] == Y else []
        return lp.value, (Y, den, inverse, 1)


def _basic_sign(inverse: list[list[int]], items) -> int:
    """1 if ``B^{-1} r >= 0``, -1 if ``B^{-1} r <= 0``, 0 if mixed; stops at the first disagreement."""
    sign = 0
    for row in inverse:
        b = sum(row[i] * c for i, c in items)
        if b:
            s = 1 if b > 0 else -1
            if sign and s != sign:
                return 0
            sign = s
    return sign or 1


def evaluate_relaxed(m: FinGenMetric, x: VectorLike, upper: Fraction | int | None = None) -> Fraction:
    """``delta(x)`` by A* search with the stable norm of the remainder as heuristic.

    The stable norm is a norm below ``delta``, so the heuristic is consistent.
    A child is queued under the cheaper bound ``|y . (x - v)|`` from its
    parent's optimal dual and re-queued once its own stable norm is known.
    The search stays small when ``delta(x)`` exceeds the stable norm by a
    little, where :func:`evaluate` and :func:`evaluate_directed` see huge
    slabs of the ball.  ``upper`` prunes as in :func:`evaluate_guided`.
    Results are kept on the metric for ``x`` and ``-x``.
    """
    cap = None if upper is None else Fraction(upper)
    x = m.check_vector(x)
    if x.is_zero():
        return Fraction(0)
    with m._lock:
        d = m._relaxed.get(x)
        if d is None:
            d = _relaxed_search(m, x, cap)
            if d is not None:
                m._relaxed[x] = m._relaxed[-x] = d
    if d is None or cap is not None and d > cap:
        raise ValueError(f"upper bound {upper} is below delta({x})")
    return d


def _relaxed_search(m: FinGenMetric, x: LatticeVector, cap: Optional[Fraction]) -> Optional[Fraction]:
    pool = m.dual_pool()
    moves = [(g.vector, g.weight) for g in m.generators]
    zero = LatticeVector()
    best = {zero: Fraction(0)}
    known: dict[LatticeVector, tuple[Fraction, tuple]] = {}
    hints: dict[LatticeVector, tuple] = {}
    heap = [(Fraction(0), 0, zero)]
    closed = set()
    budget = node_budget()
    tick = 0
    while heap:
        key, _, v = heapq.heappop(heap)
        if v in closed:
            continue
        d = best[v]
        if v not in known:
            known[v] = pool.solve(x - v, hints.pop(v, None))
        h, vertex = known[v]
        if d + h > key:
            tick += 1
            heapq.heappush(heap, (d + h, tick, v))
            continue
        if v == x:
            return d
        closed.add(v)
        if len(closed) > budget:
            raise ResourceLimit(f"relaxed search settled more than {budget} points")
        Y, den, sign = vertex[0], vertex[1], vertex[3]
        rest = sign * h * den  # Y . (x - v)
        for gv, w in moves:
            nv = v + gv
            nd = d + w
            if nv in closed:
                continue
            old = best.get(nv)
            if old is None or nd < old:
                f = nd + Fraction(abs(rest - sum(Y[i] * c for i, c in gv.items())), den)
                if cap is not None and f > cap:
                    continue
                best[nv] = nd
                hints[nv] = vertex
                tick += 1
                heapq.heappush(heap, (f, tick, nv))
    if cap is not None:
        return None
    raise NotSpanning("target unreachable")


def contraction_mismatch(
    m: FinGenMetric, images: list[LatticeVector], target: FinGenMetric
) -> Optional[LatticeVector]:
    """First generator of ``m`` that the homomorphism ``e_i -> images[i]`` stretches.

    When there is none the homomorphism is 1-Lipschitz from ``m`` to
    ``target``, so ``delta_target(pi x)`` is a lower bound for ``delta_m(x)``.
    """
    if len(images) != m.rank:
        raise RankMismatch("need one image per coordinate")
    for g in m.orbits():
        if evaluate(target, project(g.vector, images)) > g.weight:
            return g.vector
    return None


def project(x: LatticeVector, images: list[LatticeVector]) -> LatticeVector:
    out = LatticeVector(())
    for i, c in x.items():
        out = out + images[i] * c
    return out


def isometry_mismatch(
    big: FinGenMetric, small: FinGenMetric, mapping: list[int], r: Fraction | int
) -> Optional[LatticeVector]:
    """First ``x`` in ``ball(small, r)`` whose image along ``mapping`` has a different norm in ``big``.

    Unlike :func:`restriction_mismatch` only the ball of ``small`` is
    enumerated; images are evaluated one by one with :func:`evaluate_directed`.
    """
    for x, d in sorted(ball(small, r).items(), key=lambda kv: kv[0].sort_key()):
        if evaluate_directed(big, x.remap(mapping)) != d:
            return x
    return None


def stable_norm_upper(m: FinGenMetric, x: VectorLike, N: int) -> StableNormEstimate:
    """``min_{l <= N} delta(l x) / l``, an upper bound for the stable norm of ``x``.

    Every ``delta(l x)`` is exact.  A dual-feasible ``y`` of the stable norm
    program gives ``delta(l x) >= y . (l x)``, and subadditivity over smaller
    multiples gives an upper bound; when the two meet the value is settled
    without search, otherwise it comes from :func:`evaluate_relaxed`.
    """
    x = m.check_vector(x)
    if N < 1:
        raise ValueError("N must be at least 1")
    if x.is_zero():
        raise ValueError("stable norm of 0 is not estimated")
    lp = stable_norm_certificate(m, x)
    y = lp.dual
    if any(abs(sum(y[i] * c for i, c in g.vector.items())) > g.weight for g in m.generators):
        raise ArithmeticError("stable norm dual is not feasible")
    yx = sum(y[i] * c for i, c in x.items())
    D = {1: evaluate(m, x)}
    for l in range(2, N + 1):
        upper = min(D[a] + D[l - a] for a in range(1, l // 2 + 1))
        D[l] = upper if upper == l * yx else evaluate_relaxed(m, x * l, upper)
    samples = [(l, D[l] / l) for l in range(1, N + 1)]
    return StableNormEstimate(min(v for _, v in samples), samples, lp.value)


def stable_norm_lp(m: FinGenMetric, x: VectorLike) -> Fraction:
    """Exact stable norm ``lim delta(l x) / l`` via the linear relaxation."""
    return stable_norm_certificate(m, x).value


def stable_norm_certificate(m: FinGenMetric, x: VectorLike):
    from .simplex import solve_min_cost

    x = m.check_vector(x)
    if x.is_zero():
        raise ValueError("stable norm of 0 is not estimated")
    cols = [g.vector.dense(m.rank) for g in m.generators]
    costs = [g.weight for g in m.generators]
    return solve_min_cost(cols, costs, x.dense(m.rank))


def positivity_floor(m: FinGenMetric, x: VectorLike) -> Fraction:
    """``w_min |x|_1 / max_g |g|_1``: a lower bound for the stable norm of ``x``."""
    x = as_vector(x)
    return m.min_weight * x.l1 / max(g.vector.l1 for g in m.generators)


def basis_norms(m: FinGenMetric) -> list[Fraction]:
    return [evaluate(m, LatticeVector.unit(i)) for i in range(m.rank)]


def prune(m: FinGenMetric, keep: Iterable[LatticeVector] = ()) -> FinGenMetric:
    """Drop generators that are sums of other generators of no greater total weight.

    The metric is unchanged: every removed generator has a replacement using
    strictly lighter generators, so replacements never cycle.  Vectors listed
    in ``keep`` survive regardless.
    """
    if not m.generators:
        return m
    keep = set(keep)
    with m._lock:
        eng = m.engine()
        eng.settle_through(eng.max_move)
        done, dist = eng.done, eng.dist
        order, order_d = eng.order, eng.order_d
        survivors = []
        for g, (code, w, _) in zip(m.generators, eng.moves):
            if g.vector in keep or (-g.vector) in keep:
                survivors.append(g)
                continue
            redundant = False
            for k in range(1, len(order)):
                du = order_d[k]
                if 2 * du > w:
                    break
                u = order[k]
                if u == code:
                    continue
                rest = code - u
                if rest in done and rest != code and du + dist[rest] <= w:
                    redundant = True
                    break
            if not redundant:
                survivors.append(g)
    return FinGenMetric(m.rank, survivors)
