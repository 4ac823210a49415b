"""Line-oriented text formats for metrics, Katětov functions and norm tables.

Every format starts with a version header.  Blank lines and ``#`` comments
are ignored.  Numbers are exact: integers or ``p/q``.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterator, Optional

from .errors import ParseError
from .vectors import LatticeVector, format_rational, parse_rational
from .wordmetric import FinGenMetric, normalize


class Lines:
    """Cursor over the meaningful lines of a text, keeping 1-based line numbers."""

    def __init__(self, text: str):
        self.items: list[tuple[int, list[str]]] = []
        for no, raw in enumerate(text.splitlines(), 1):
            body = raw.split("#", 1)[0].strip()
            if body:
                self.items.append((no, body.split()))
        self.pos = 0

    def peek(self) -> Optional[tuple[int, list[str]]]:
        return self.items[self.pos] if self.pos < len(self.items) else None

    def next(self, what: str) -> tuple[int, list[str]]:
        item = self.peek()
        if item is None:
            last = self.items[-1][0] if self.items else 0
            raise ParseError(f"unexpected end of input, expected {what}", last + 1)
        self.pos += 1
        return item

    def expect(self, *words: str) -> tuple[int, list[str]]:
        no, toks = self.next(" ".join(words))
        if toks[: len(words)] != list(words):
            raise ParseError(f"expected {' '.join(words)!r}, got {' '.join(toks)!r}", no)
        return no, toks[len(words):]

    def done(self) -> bool:
        return self.peek() is None


def _int(tok: str, no: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ParseError(f"not an integer: {tok!r}", no) from None


def _rational(tok: str, no: int) -> Fraction:
    try:
        return parse_rational(tok)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"not an exact rational: {tok!r}", no) from None


def _entry(toks: list[str], key: str, rank: int, no: int) -> tuple[LatticeVector, Fraction]:
    """Parse ``c1 .. cn <key> value``."""
    if len(toks) != rank + 2 or toks[rank] != key:
        raise ParseError(f"expected {rank} coordinates then '{key} <value>'", no)
    coords = [_int(t, no) for t in toks[:rank]]
    return LatticeVector.from_dense(coords), _rational(toks[rank + 1], no)


def _rank(lines: Lines) -> int:
    no, rest = lines.expect("rank")
    if len(rest) != 1:
        raise ParseError("expected 'rank <n>'", no)
    n = _int(rest[0], no)
    if n < 0:
        raise ParseError("rank must be nonnegative", no)
    return n


# -- metric v1 ------------------------------------------------------------------


def read_metric(lines: Lines) -> FinGenMetric:
    lines.expect("metric", "v1")
    rank = _rank(lines)
    raw = []
    while (item := lines.peek()) is not None and item[1][0] == "gen":
        no, toks = lines.next("gen")
        raw.append(_entry(toks[1:], "w", rank, no))
    return normalize(raw, rank)


def parse_metric(text: str) -> FinGenMetric:
    lines = Lines(text)
    m = read_metric(lines)
    if not lines.done():
        no, toks = lines.next("")
        raise ParseError(f"unexpected line {' '.join(toks)!r}", no)
    return m


def write_metric(m: FinGenMetric) -> str:
    out = ["metric v1", f"rank {m.rank}"]
    for g in m.orbits():
        coords = " ".join(str(c) for c in g.vector.dense(m.rank))
        out.append(f"gen {coords} w {format_rational(g.weight)}")
    return "\n".join(out) + "\n"


# -- katetov v1 -------------------------------------------------------------------


def read_points(lines: Lines, rank: int) -> dict[LatticeVector, Fraction]:
    values: dict[LatticeVector, Fraction] = {}
    while (item := lines.peek()) is not None and item[1][0] == "point":
        no, toks = lines.next("point")
        a, v = _entry(toks[1:], "f", rank, no)
        if a in values:
            raise ParseError(f"point {list(a.dense(rank))} listed twice", no)
        values[a] = v
    return values


def write_points(values, rank: int) -> list[str]:
    return [
        f"point {' '.join(str(c) for c in a.dense(rank))} f {format_rational(v)}" for a, v in values.items()
    ]


def parse_katetov(text: str, load_metric) -> tuple[str, dict[LatticeVector, Fraction], FinGenMetric]:
    """Parse a ``katetov v1`` file; ``load_metric(path)`` resolves the base metric."""
    lines = Lines(text)
    lines.expect("katetov", "v1")
    no, rest = lines.expect("metric")
    if len(rest) != 1:
        raise ParseError("expected 'metric <path>'", no)
    base = load_metric(rest[0])
    values = read_points(lines, base.rank)
    if not lines.done():
        no, toks = lines.next("")
        raise ParseError(f"unexpected line {' '.join(toks)!r}", no)
    return rest[0], values, base


def write_katetov(path: str, values, rank: int) -> str:
    return "\n".join(["katetov v1", f"metric {path}"] + write_points(values, rank)) + "\n"


# -- oracle v1 --------------------------------------------------------------------


def parse_oracle_table(text: str) -> tuple[int, dict[LatticeVector, Fraction]]:
    lines = Lines(text)
    lines.expect("oracle", "v1")
    rank = _rank(lines)
    table: dict[LatticeVector, Fraction] = {}
    while not lines.done():
        no, toks = lines.next("point")
        if toks[0] != "point":
            raise ParseError(f"unexpected line {' '.join(toks)!r}", no)
        x, v = _entry(toks[1:], "value", rank, no)
        if x in table and table[x] != v:
            raise ParseError("conflicting values for the same point", no)
        table[x] = v
    return rank, table


def write_oracle_table(rank: int, table) -> str:
    out = ["oracle v1", f"rank {rank}"]
    for x in sorted(table, key=LatticeVector.sort_key):
        out.append(f"point {' '.join(str(c) for c in x.dense(rank))} value {format_rational(table[x])}")
    return "\n".join(out) + "\n"


# -- TSV ---------------------------------------------------------------------------


def ball_tsv(rank: int, entries) -> Iterator[str]:
    """Rows ``x1 .. xn delta_num delta_den`` with a header line."""
    yield "\t".join([f"x{i + 1}" for i in range(rank)] + ["delta_num", "delta_den"])
    for x, d in entries:
        yield "\t".join([str(c) for c in x.dense(rank)] + [str(d.numerator), str(d.denominator)])
