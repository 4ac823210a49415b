"""Amalgamation of two metric stages over a shared coordinate block.

Coordinates of the amalgam are laid out as: the shared block ``[0, s)``, then
the left-private block ``[s, s + p)``, then the right-private block
``[s + p, s + p + q)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import RankMismatch, SharedPartMismatch, VerificationFailure
from .vectors import LatticeVector, VectorLike, as_vector
from .wordmetric import (
    FinGenMetric,
    ball,
    ball_mismatch,
    evaluate,
    normalize,
    permute,
    restricted_ball,
    restriction_mismatch,
)


@dataclass(frozen=True)
class AmalgamSpec:
    shared_rank: int
    left: FinGenMetric
    right: FinGenMetric

    def __post_init__(self):
        if self.shared_rank < 0 or self.shared_rank > min(self.left.rank, self.right.rank):
            raise RankMismatch("shared block larger than one of the sides")

    @property
    def left_private(self) -> int:
        return self.left.rank - self.shared_rank

    @property
    def right_private(self) -> int:
        return self.right.rank - self.shared_rank

    @property
    def rank(self) -> int:
        return self.shared_rank + self.left_private + self.right_private

    def left_map(self) -> list[int]:
        return list(range(self.left.rank))

    def right_map(self) -> list[int]:
        s, p = self.shared_rank, self.left_private
        return [i if i < s else i + p for i in range(self.right.rank)]

    def default_radius(self) -> Fraction:
        return 2 * max(self.left.max_weight, self.right.max_weight)


def shared_mismatch(spec: AmalgamSpec, radius: Fraction | int) -> Optional[LatticeVector]:
    shared = list(range(spec.shared_rank))
    return ball_mismatch(
        restricted_ball(spec.left, shared, radius), restricted_ball(spec.right, shared, radius)
    )


def amalgamate(spec: AmalgamSpec, radius: Fraction | int | None = None, verify: bool = True) -> FinGenMetric:
    """Union of both generating sets after reindexing the right side.

    The shared blocks are compared on a ball first; afterwards both inclusions
    are checked to be isometric on the same ball.
    """
    r = spec.default_radius() if radius is None else Fraction(radius)
    bad = shared_mismatch(spec, r)
    if bad is not None:
        raise SharedPartMismatch(f"sides disagree on the shared block at {bad}", bad)
    rmap = spec.right_map()
    raw = [(g.vector, g.weight) for g in spec.left.generators]
    raw += [(g.vector.remap(rmap), g.weight) for g in spec.right.generators]
    out = normalize(raw, spec.rank)
    if verify:
        for side, mapping, name in ((spec.left, spec.left_map(), "left"), (spec.right, rmap, "right")):
            bad = restriction_mismatch(out, side, mapping, r)
            if bad is not None:
                raise VerificationFailure(f"{name} inclusion is not isometric at {bad}", bad)
    return out


def split_norm(spec: AmalgamSpec, v: VectorLike, bound: Fraction | int) -> Optional[Fraction]:
    """``min d_L(v_L) + d_R(v_R)`` over splittings ``v = v_L + v_R`` with ``d_L(v_L) <= bound``.

    ``v`` is in amalgam coordinates.  Once ``bound`` reaches the amalgam norm
    of ``v`` the result equals that norm; ``None`` means no admissible split.
    """
    v = as_vector(v)
    s, p = spec.shared_rank, spec.left_private
    left_part = {i: c for i, c in v.items() if s <= i < s + p}
    rmap = spec.right_map()
    best = None
    for vl, dl in ball(spec.left, bound).items():
        if {i: c for i, c in vl.items() if i >= s} != left_part:
            continue
        rest = v - vl
        # rest has no left-private entries; pull it back to right coordinates
        back = LatticeVector((i if i < s else i - p, c) for i, c in rest.items())
        total = dl + evaluate(spec.right, back)
        if best is None or total < best:
            best = total
    return best


def h_coordinates(stage_rank: int, f_embed: list[int], h_rank: int) -> list[int]:
    """Where ``extend_over`` places each coordinate of ``h`` inside the result."""
    k = len(f_embed)
    return list(f_embed) + [stage_rank + i - k for i in range(k, h_rank)]


def extend_over(
    stage: FinGenMetric, f_embed: list[int], h: FinGenMetric, radius: Fraction | int | None = None
) -> FinGenMetric:
    """Amalgamate ``h`` into ``stage`` over ``F``.

    ``F`` is the first ``len(f_embed)`` coordinates of ``h``; its coordinate
    ``i`` sits at ``stage`` coordinate ``f_embed[i]``.  Every ``stage``
    coordinate keeps its index and the private coordinates of ``h`` are
    appended (see :func:`h_coordinates`).
    """
    k = len(f_embed)
    if len(set(f_embed)) != k or any(not 0 <= j < stage.rank for j in f_embed):
        raise RankMismatch("F must embed injectively into the stage coordinates")
    if k > h.rank:
        raise RankMismatch("F has more coordinates than h")
    others = [j for j in range(stage.rank) if j not in set(f_embed)]
    order = list(f_embed) + others  # new position -> stage coordinate
    to_front = [0] * stage.rank
    for pos, j in enumerate(order):
        to_front[j] = pos
    spec = AmalgamSpec(k, permute(stage, to_front), h)
    out = amalgamate(spec, radius)
    back = order + list(range(stage.rank, out.rank))
    return permute(out, back)
