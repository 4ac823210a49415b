"""Finite-support integer vectors and small helpers around them.

A :class:`LatticeVector` is an element of the free abelian group on the
generators ``e_0, e_1, ...``.  It is stored sparsely, so a vector of a small
group is literally the same object when viewed inside any larger group that
extends it by extra coordinates.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Mapping, Sequence
from fractions import Fraction
from itertools import product
from typing import Union


class LatticeVector:
    __slots__ = ("_items", "_hash")

    def __init__(self, coords: Mapping[int, int] | Iterable[tuple[int, int]] = ()):
        if isinstance(coords, Mapping):
            coords = coords.items()
        acc: dict[int, int] = {}
        for i, c in coords:
            if i < 0:
                raise ValueError(f"negative coordinate index {i}")
            acc[i] = acc.get(i, 0) + int(c)
        self._items = tuple(sorted((i, c) for i, c in acc.items() if c))
        self._hash = hash(self._items)

    @classmethod
    def of(cls, *coords: int) -> "LatticeVector":
        """Build from dense coordinates: ``LatticeVector.of(1, 0, -2)``."""
        return cls(enumerate(coords))

    @classmethod
    def from_dense(cls, coords: Sequence[int]) -> "LatticeVector":
        return cls(enumerate(coords))

    @classmethod
    def unit(cls, i: int, scale: int = 1) -> "LatticeVector":
        return cls(((i, scale),))

    @property
    def coords(self) -> dict[int, int]:
        return dict(self._items)

    def items(self) -> tuple[tuple[int, int], ...]:
        return self._items

    def __getitem__(self, i: int) -> int:
        for j, c in self._items:
            if j == i:
                return c
        return 0

    def __iter__(self):
        # indexing defaults to 0, so the implicit sequence protocol would never stop
        raise TypeError("LatticeVector is not iterable; use items() or dense()")

    def dense(self, rank: int) -> tuple[int, ...]:
        out = [0] * rank
        for i, c in self._items:
            if i >= rank:
                raise ValueError(f"coordinate {i} outside rank {rank}")
            out[i] = c
        return tuple(out)

    @property
    def support_size(self) -> int:
        """Smallest rank of a group containing this vector."""
        return self._items[-1][0] + 1 if self._items else 0

    @property
    def l1(self) -> int:
        return sum(abs(c) for _, c in self._items)

    @property
    def linf(self) -> int:
        return max((abs(c) for _, c in self._items), default=0)

    def is_zero(self) -> bool:
        return not self._items

    def __bool__(self) -> bool:
        return bool(self._items)

    @classmethod
    def _canonical(cls, items: tuple[tuple[int, int], ...]) -> "LatticeVector":
        # items already sorted by index with nonzero entries
        v = object.__new__(cls)
        v._items = items
        v._hash = hash(items)
        return v

    def __add__(self, other: "LatticeVector") -> "LatticeVector":
        acc = dict(self._items)
        for i, c in other._items:
            acc[i] = acc.get(i, 0) + c
        return LatticeVector._canonical(tuple(sorted((i, c) for i, c in acc.items() if c)))

    def __neg__(self) -> "LatticeVector":
        return LatticeVector._canonical(tuple((i, -c) for i, c in self._items))

    def __sub__(self, other: "LatticeVector") -> "LatticeVector":
        acc = dict(self._items)
        for i, c in other._items:
            acc[i] = acc.get(i, 0) - c
        return LatticeVector._canonical(tuple(sorted((i, c) for i, c in acc.items() if c)))

    def __mul__(self, k: int) -> "LatticeVector":
        k = int(k)
        if k == 0:
            return LatticeVector._canonical(())
        return LatticeVector._canonical(tuple((i, k * c) for i, c in self._items))

    __rmul__ = __mul__

    def remap(self, mapping: Mapping[int, int] | Sequence[int]) -> "LatticeVector":
        """Send coordinate ``i`` to coordinate ``mapping[i]``."""
        return LatticeVector((mapping[i], c) for i, c in self._items)

    def __eq__(self, other) -> bool:
        if isinstance(other, LatticeVector):
            return self._items == other._items
        return NotImplemented

    def __hash__(self) -> int:
        return self._hash

    def __lt__(self, other: "LatticeVector") -> bool:
        return self.sort_key() < other.sort_key()

    def sort_key(self) -> tuple:
        """Graded order: by l1 norm, then by the sparse coordinate list."""
        return (self.l1, self._items)

    def __repr__(self) -> str:
        if not self._items:
            return "LatticeVector(0)"
        body = ", ".join(f"{i}: {c}" for i, c in self._items)
        return f"LatticeVector({{{body}}})"


VectorLike = Union[LatticeVector, Sequence[int], Mapping[int, int]]


def as_vector(v: VectorLike) -> LatticeVector:
    if isinstance(v, LatticeVector):
        return v
    if isinstance(v, Mapping):
        return LatticeVector(v)
    return LatticeVector.from_dense(v)


def l1_ball(rank: int, radius: int, *, include_zero: bool = True) -> Iterator[LatticeVector]:
    """All vectors of ``Z^rank`` with l1 norm at most ``radius``, graded order."""
    for norm in range(0 if include_zero else 1, radius + 1):
        yield from l1_sphere(rank, norm)


def l1_sphere(rank: int, norm: int) -> Iterator[LatticeVector]:
    if norm == 0:
        yield LatticeVector()
        return
    if rank == 0:
        return
    for absvals in _compositions(norm, rank):
        nz = [i for i, a in enumerate(absvals) if a]
        for signs in product((1, -1), repeat=len(nz)):
            yield LatticeVector((i, s * absvals[i]) for i, s in zip(nz, signs))


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def box(rank: int, k: int) -> Iterator[LatticeVector]:
    """The cube ``{x : |x_i| <= k}``."""
    for coords in product(range(-k, k + 1), repeat=rank):
        yield LatticeVector.from_dense(coords)


def format_rational(q: Fraction | int) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def parse_rational(text: str) -> Fraction:
    text = text.strip()
    if not text or any(ch in text for ch in ".eE "):
        raise ValueError(f"not an exact rational: {text!r}")
    q = Fraction(text)
    return q
