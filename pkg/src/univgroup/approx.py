"""Approximating invariant norms on ``Z^n`` by finitely generated rational metrics.

A norm is supplied as a :class:`NormOracle`.  :func:`approximate` samples it
on ``m A_k`` (multiples of the cube ``A_k = {x : |x_i| <= k}``), takes the
metric generated by those values and certifies the result on an l1 ball.
:func:`rationalize` perturbs the weights of a metric upwards by a controlled
amount.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil
from typing import Callable, Iterable, Optional

from .errors import (
    ApproximationNotCertified,
    OracleAxiomViolation,
    OracleDomainError,
    RankMismatch,
)
from .vectors import LatticeVector, VectorLike, as_vector, box, l1_ball
from .wordmetric import FinGenMetric, basis_norms, evaluate, normalize, prune

_TRIANGLE_SAMPLE = 48


class NormOracle:
    """A black-box invariant norm on ``Z^rank``, checked as it is queried.

    Every answer is cached.  Each query checks ``p(0) = 0``, positivity and
    ``p(x) = p(-x)``, and tests the triangle inequality against a window of
    recently cached points; a failure raises :class:`OracleAxiomViolation`.
    """

    def __init__(self, rank: int, query: Callable[[LatticeVector], Fraction], name: str = "oracle"):
        self.rank = rank
        self._query = query
        self.name = name
        self._cache: dict[LatticeVector, Fraction] = {}
        self._recent: list[LatticeVector] = []

    @classmethod
    def from_metric(cls, m: FinGenMetric, name: str = "metric") -> "NormOracle":
        return cls(m.rank, lambda x: evaluate(m, x), name)

    @classmethod
    def from_table(cls, rank: int, table: dict[LatticeVector, Fraction], name: str = "table") -> "NormOracle":
        def look(x: LatticeVector) -> Fraction:
            if x.is_zero():
                return table.get(x, Fraction(0))
            if x in table:
                return table[x]
            raise OracleDomainError(f"{list(x.dense(rank))} is not in the table")

        return cls(rank, look, name)

    def restrict(self, rank: int) -> "NormOracle":
        """The same norm on the first ``rank`` coordinates."""
        if rank > self.rank:
            raise RankMismatch(f"cannot restrict rank {self.rank} to {rank}")
        return NormOracle(rank, self, f"{self.name}|{rank}")

    def _raw(self, x: LatticeVector) -> Fraction:
        v = self._query(x)
        if isinstance(v, float):
            raise OracleAxiomViolation(f"{self.name} returned a float for {x}")
        v = Fraction(v)
        if x.is_zero() and v != 0:
            raise OracleAxiomViolation(f"{self.name}(0) = {v}")
        if not x.is_zero() and v <= 0:
            raise OracleAxiomViolation(f"{self.name}({x}) = {v} is not positive")
        return v

    def __call__(self, x: VectorLike) -> Fraction:
        x = as_vector(x)
        if x.support_size > self.rank:
            raise RankMismatch(f"{x} does not live in Z^{self.rank}")
        hit = self._cache.get(x)
        if hit is not None:
            return hit
        v = self._raw(x)
        if not x.is_zero():
            w = self._raw(-x)
            if w != v:
                raise OracleAxiomViolation(f"{self.name} is not symmetric at {x}: {v} vs {w}")
            self._cache[-x] = v
        self._cache[x] = v
        self._check_triangles(x, v)
        return v

    def _check_triangles(self, x: LatticeVector, v: Fraction) -> None:
        cache = self._cache
        for y in self._recent:
            z = x - y
            if z in cache and v > cache[y] + cache[z]:
                raise OracleAxiomViolation(f"triangle inequality fails: {x} = {y} + {z}")
            z = y - x
            if z in cache and cache[y] > v + cache[z]:
                raise OracleAxiomViolation(f"triangle inequality fails: {y} = {x} + {z}")
        self._recent.append(x)
        if len(self._recent) > _TRIANGLE_SAMPLE:
            self._recent.pop(0)

    def check_axioms(self, radius: int) -> None:
        """Exhaustive check of all axioms on pairs from the l1 ball of ``radius``."""
        pts = list(l1_ball(self.rank, radius))
        vals = {x: self(x) for x in pts}
        for x in pts:
            for y in pts:
                s = x + y
                if s in vals and vals[s] > vals[x] + vals[y]:
                    raise OracleAxiomViolation(f"triangle inequality fails: {s} = {x} + {y}")


# -- the B_k quantities ------------------------------------------------------------


def _best_multiple(xi: int, l: int, k: int) -> int:
    """``y`` in ``[-k, k]`` minimizing ``|xi - l y|``, the smaller ``|y|`` on ties."""
    lo = max(-k, min(k, xi // l))
    hi = max(-k, min(k, -((-xi) // l)))
    a, b = abs(xi - l * lo), abs(xi - l * hi)
    if a != b:
        return lo if a < b else hi
    return lo if abs(lo) <= abs(hi) else hi


def min_ratio(n: int, k: int, x: VectorLike) -> Fraction:
    """``min |x - l y|_1 / |x|_1`` over ``l >= 1``, ``y`` in ``A_k`` with ``|l y|_1 <= 2 |x|_1``.

    For a fixed ``l`` the best ``y`` rounds each coordinate separately; each
    rounded term satisfies ``|l y_i| <= 2 |x_i|`` (``y_i = 0`` is never worse
    than ``|x_i|``), so the length constraint never binds.  ``l`` ranges up to
    ``2 |x|_1`` because a nonzero ``y`` forces ``l <= |l y|_1``.
    """
    x = as_vector(x)
    if k < 1:
        raise ValueError("k must be at least 1")
    if x.is_zero():
        raise ValueError("x must be nonzero")
    coords = x.dense(n)
    size = x.l1
    best = size
    for l in range(1, 2 * size + 1):
        err = 0
        for xi in coords:
            err += abs(xi - l * _best_multiple(xi, l, k))
            if err >= best:
                break
        if err < best:
            best = err
            if best == 0:
                break
    return Fraction(best, size)


@dataclass
class BkBounds:
    empirical: Fraction
    certified: Fraction
    threshold: int
    tail_bound: Fraction
    witness: Optional[LatticeVector] = None


def b_k_upper(n: int, k: int, R: int) -> BkBounds:
    """Empirical and certified upper values for ``B_k`` from the ball ``|x|_1 <= R``.

    Every ``x`` with ``|x|_inf < threshold = floor(R / n) + 1`` lies in the
    ball, so its ratio is known exactly.  For the rest the constructive bound
    ``(k + n - 1) / |x|_inf + (n - 1) / k`` applies (ratios inside ``A_k``
    are 0).  For ``n = 1`` every ``x`` is a multiple of ``±1`` and all ratios
    vanish.
    """
    if k < 1 or R < 1:
        raise ValueError("k and R must be at least 1")
    threshold = R // n + 1
    empirical, witness = Fraction(0), None
    inner = Fraction(0)
    for x in l1_ball(n, R, include_zero=False):
        r = min_ratio(n, k, x)
        if r > empirical:
            empirical, witness = r, x
        if x.linf < threshold and r > inner:
            inner = r
    tail = Fraction(0) if n == 1 else Fraction(k + n - 1, threshold) + Fraction(n - 1, k)
    return BkBounds(empirical, max(inner, tail), threshold, tail, witness)


# -- approximation ---------------------------------------------------------------------


@dataclass
class ApproxParams:
    m0: int = 1
    m1: int = 1
    m: int = 1
    epsilon: Fraction = Fraction(1, 4)
    M: Fraction = Fraction(0)
    lp_window: int = 4

    def __post_init__(self):
        self.epsilon = Fraction(self.epsilon)
        if not self.m >= self.m1 >= self.m0 >= 1:
            raise ValueError("need m >= m1 >= m0 >= 1")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")


def stabilization_index(p: NormOracle, y: LatticeVector, eps: Fraction, window: int, limit: int) -> int:
    """Least ``l`` after which ``p(l y) / l`` moves less than ``eps / 32`` for ``window`` steps.

    Capped at ``limit``.  This is a heuristic stand-in for convergence to the
    stable norm, which no finite sample certifies.
    """
    tol = Fraction(eps) / 32
    vals = {}

    def s(l: int) -> Fraction:
        if l not in vals:
            vals[l] = p(y * l) / l
        return vals[l]

    for l in range(1, limit + 1):
        if all(abs(s(l + j) - s(l)) < tol for j in range(1, window + 1)):
            return l
    return limit


def auto_params(p: NormOracle, eps: Fraction, lp_window: int = 4, m0: int = 1, limit: int = 24) -> ApproxParams:
    M = max(basis_norms_of(p), default=Fraction(0))
    m1 = m0
    for y in box(p.rank, m0):
        if not y.is_zero():
            m1 = max(m1, stabilization_index(p, y, eps, lp_window, limit))
    return ApproxParams(m0, m1, m1, eps, M, lp_window)


def basis_norms_of(p: NormOracle) -> list[Fraction]:
    return [p(LatticeVector.unit(i)) for i in range(p.rank)]


def sample_set(rank: int, m0: int, m: int) -> set[LatticeVector]:
    """``m A_{m0}``: multiples ``j x`` with ``1 <= j <= m`` and ``x`` in the cube, plus 0."""
    out = {LatticeVector()}
    for x in box(rank, m0):
        for j in range(1, m + 1):
            out.add(x * j)
    return out


def difference_generators(
    p: NormOracle, samples: Iterable[LatticeVector], include: Iterable[LatticeVector] = ()
) -> dict[LatticeVector, Fraction]:
    """Weights ``p(a - b)`` on all differences, minus those split cheaply in two.

    A difference ``v`` is dropped when ``v = a + b`` for two other differences
    with ``p(a) + p(b) <= p(v)``; vectors in ``include`` are always kept.
    The dropped vectors are redundant, so the generated metric is unchanged.
    """
    pts = sorted(samples, key=LatticeVector.sort_key)
    diffs = {a - b for a in pts for b in pts}
    diffs.discard(LatticeVector())
    keep = {v for v in include if not v.is_zero()}
    diffs |= keep | {-v for v in keep}
    weight = {v: p(v) for v in diffs}
    ordered = sorted(diffs, key=lambda v: (weight[v], v.sort_key()))
    out = {}
    for v in ordered:
        if v in keep or -v in keep:
            out[v] = weight[v]
            continue
        wv = weight[v]
        redundant = False
        for a in ordered:
            wa = weight[a]
            if 2 * wa > wv:
                break
            b = v - a
            if b != v and b in weight and wa + weight[b] <= wv and not b.is_zero():
                redundant = True
                break
        if not redundant:
            out[v] = wv
    return out


@dataclass
class ApproxResult:
    metric: FinGenMetric
    params: ApproxParams
    worst_ratio: Fraction
    witness: Optional[LatticeVector]
    radius: int
    attempts: int = 1
    history: list[tuple[ApproxParams, Fraction]] = field(default_factory=list)


def certify(p: NormOracle, dF: FinGenMetric, radius: int) -> tuple[Fraction, Optional[LatticeVector], Optional[LatticeVector]]:
    """Worst ``|d_F - p| / |x|_1`` on the ball, a witness, and the first point where ``d_F < p``."""
    worst, witness, below = Fraction(0), None, None
    for x in l1_ball(p.rank, radius, include_zero=False):
        px, fx = p(x), evaluate(dF, x)
        if fx < px and below is None:
            below = x
        r = abs(fx - px) / x.l1
        if r > worst:
            worst, witness = r, x
    return worst, witness, below


def approximate_report(
    p: NormOracle,
    eps: Fraction | int | str,
    params: Optional[ApproxParams] = None,
    radius: int = 8,
    retries: int = 3,
    include: Iterable[LatticeVector] = (),
) -> ApproxResult:
    """Approximate ``p`` within ``eps`` on the ball ``|x|_1 <= radius``.

    The metric is generated by ``p`` on the differences of ``m A_{m0}``
    together with the vectors in ``include``.  It dominates ``p`` everywhere
    and agrees with it on the generators; on failure the sample grows
    (``m`` doubles, ``m0`` grows by one) up to ``retries`` more times.
    """
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    if radius < 1:
        raise ValueError("radius must be at least 1")
    include = [as_vector(v) for v in include]
    if params is None:
        params = auto_params(p, eps)
    else:
        params = ApproxParams(params.m0, params.m1, params.m, eps, params.M, params.lp_window)
    history = []
    for attempt in range(retries + 1):
        gens = difference_generators(p, sample_set(p.rank, params.m0, params.m), include)
        dF = normalize(gens.items(), p.rank)
        dF = prune(dF, keep=include)
        worst, witness, below = certify(p, dF, radius)
        if below is not None:
            raise ApproximationNotCertified(
                f"generated metric falls below the oracle at {below}; the oracle is not a norm of this form",
                worst,
                below,
            )
        history.append((params, worst))
        if worst <= eps:
            return ApproxResult(dF, params, worst, witness, radius, attempt + 1, history)
        params = ApproxParams(
            params.m0 + 1, params.m1, max(2 * params.m, params.m1), eps, params.M, params.lp_window
        )
    raise ApproximationNotCertified(
        f"ball ratio {history[-1][1]} exceeds {eps} after {retries + 1} attempts", history[-1][1], witness
    )


def approximate(p: NormOracle, eps, params: Optional[ApproxParams] = None, radius: int = 8, retries: int = 3) -> FinGenMetric:
    return approximate_report(p, eps, params, radius, retries).metric


# -- rationalization -------------------------------------------------------------------


@dataclass
class RationalizeInfo:
    M: Fraction
    min_weight: Fraction
    K: int
    bump: Fraction


def rationalize_info(m: FinGenMetric, eps: Fraction) -> RationalizeInfo:
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    M = max(basis_norms(m), default=Fraction(0))
    mw = m.min_weight if m.generators else Fraction(1)
    K = max(1, ceil(M / mw))
    return RationalizeInfo(M, mw, K, 3 * eps / (4 * K))


def rationalize(m: FinGenMetric, eps: Fraction | int | str) -> FinGenMetric:
    """Raise every weight by ``3 eps / (4K)`` with ``K = ceil(M / w_min)``.

    ``M`` is the largest norm of a basis vector.  An optimal decomposition of
    ``x`` uses at most ``K |x|_1`` generators, so the new metric exceeds the old
    one by at most ``eps |x|_1`` and never falls below it.
    """
    info = rationalize_info(m, Fraction(eps))
    return normalize(((g.vector, g.weight + info.bump) for g in m.orbits()), m.rank)
