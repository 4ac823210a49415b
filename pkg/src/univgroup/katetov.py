"""Katětov functions over metric stages and one-generator extensions realizing them."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional

from .errors import KatetovViolation, RankMismatch, VerificationFailure
from .vectors import LatticeVector, VectorLike, as_vector
from .wordmetric import FinGenMetric, evaluate, normalize, restriction_mismatch


@dataclass(frozen=True)
class KatetovFn:
    """Prescribed distances from a new point to finitely many points of ``base``."""

    base: FinGenMetric
    values: Mapping[LatticeVector, Fraction]

    def __post_init__(self):
        clean = {}
        for a, v in self.values.items():
            clean[self.base.check_vector(a)] = Fraction(v)
        object.__setattr__(self, "values", dict(sorted(clean.items(), key=lambda kv: kv[0].sort_key())))

    @classmethod
    def of(cls, base: FinGenMetric, values: Iterable[tuple[VectorLike, Fraction | int | str]]):
        return cls(base, {as_vector(a): Fraction(v) for a, v in values})

    @property
    def domain(self) -> list[LatticeVector]:
        return list(self.values)

    def __eq__(self, other) -> bool:
        if not isinstance(other, KatetovFn):
            return NotImplemented
        return self.base == other.base and self.values == other.values

    def lift(self, stage: FinGenMetric) -> "KatetovFn":
        """The same prescription over a stage extending ``base`` by extra coordinates."""
        return KatetovFn(stage, self.values)


@dataclass
class KatetovCheck:
    ok: bool
    pair: Optional[tuple[LatticeVector, LatticeVector]] = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def validate_katetov(f: KatetovFn) -> KatetovCheck:
    """Check ``|f(x) - f(y)| <= d(x, y) <= f(x) + f(y)`` on every ordered pair."""
    dom = f.domain
    for a in dom:
        if f.values[a] <= 0:
            return KatetovCheck(False, (a, a), f"value at {a} is not positive")
    for a in dom:
        for b in dom:
            if a == b:
                continue
            d = evaluate(f.base, a - b)
            fa, fb = f.values[a], f.values[b]
            if abs(fa - fb) > d:
                return KatetovCheck(False, (a, b), f"|f(a) - f(b)| = {abs(fa - fb)} > d(a, b) = {d}")
            if d > fa + fb:
                return KatetovCheck(False, (a, b), f"d(a, b) = {d} > f(a) + f(b) = {fa + fb}")
    return KatetovCheck(True)


def symmetrize(f: KatetovFn) -> KatetovFn:
    """Close the domain under negation; a new point gets ``min_b d(a, b) + f(b)``."""
    values = dict(f.values)
    for a in f.domain:
        na = -a
        if na in values:
            continue
        values[na] = min(evaluate(f.base, na - b) + fb for b, fb in f.values.items())
    return KatetovFn(f.base, values)


def default_radius(f: KatetovFn) -> Fraction:
    top = max(f.values.values(), default=Fraction(0))
    return top + f.base.max_weight


def katetov_extend(
    f: KatetovFn,
    radius: Fraction | int | None = None,
    verify: bool = True,
    over: Optional[FinGenMetric] = None,
) -> FinGenMetric:
    """Add a generator ``z`` (the new last coordinate) with ``d(z, a) = f(a)``.

    The result is generated by the base generators plus ``z - a`` with weight
    ``f(a)`` for every point of the symmetrized domain.  ``over`` may name a
    larger stage containing ``f.base`` as its initial coordinates; the
    Katětov conditions and the symmetrization are computed over ``f.base``
    and carry over through the inclusion.

    With ``verify`` the old stage is compared with the restriction of the
    result on the ball of the given radius (default :func:`default_radius`),
    and ``d(z, a) = f(a)`` is checked on the original domain and on those
    added negations whose value lies within the radius.
    """
    check = validate_katetov(f)
    if not check:
        raise KatetovViolation(check.reason, check.pair)
    if not f.values:
        raise KatetovViolation("empty domain leaves the new generator unconstrained")
    base = f.base if over is None else over
    if base.rank < f.base.rank:
        raise RankMismatch("the target stage is smaller than the base of f")
    r = default_radius(f.lift(base)) if radius is None else Fraction(radius)
    sym = symmetrize(f)
    z = LatticeVector.unit(base.rank)
    raw = [(g.vector, g.weight) for g in base.generators]
    raw += [(z - a, fa) for a, fa in sym.values.items()]
    ext = normalize(raw, base.rank + 1)
    if verify:
        bad = restriction_mismatch(ext, base, list(range(base.rank)), r)
        if bad is not None:
            raise VerificationFailure(f"extension changed the base metric at {bad}", bad)
        for a, fa in sym.values.items():
            if a in f.values or fa <= r:
                got = evaluate(ext, z - a)
                if got != fa:
                    raise VerificationFailure(f"d(z, {a}) = {got}, expected {fa}", a)
    return ext


def densify(
    m: FinGenMetric, targets: Iterable[tuple[VectorLike, int]], radius: Fraction | int | None = None
) -> FinGenMetric:
    """For each ``(g, k)`` add a new generator at distance ``1/k`` from ``g``."""
    cur = m
    for g, k in targets:
        if k < 1:
            raise ValueError("denominator must be at least 1")
        cur = katetov_extend(KatetovFn.of(cur, [(g, Fraction(1, k))]), radius)
    return cur
