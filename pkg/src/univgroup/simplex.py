"""Exact two-phase simplex over the rationals with Bland's pivoting rule.

Solves ``min c.x  s.t.  A x = b, x >= 0`` where ``A`` is given column-wise.
Problems here are small (one row per lattice coordinate, one column per
generator), so a dense tableau of ``Fraction`` is adequate.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence


class Infeasible(ArithmeticError):
    pass


class Unbounded(ArithmeticError):
    pass


@dataclass
class LPResult:
    value: Fraction
    primal: dict[int, Fraction]  # column index -> value, nonzero entries only
    dual: tuple[Fraction, ...]  # one multiplier per row of A
    pivots: int
    basis: tuple[int, ...] = ()  # column per row; indices >= len(columns) are artificial
    inverse: tuple[tuple[Fraction, ...], ...] = ()  # B^{-1}, so basic values are inverse . b

    def check(self, columns, costs, b) -> bool:
        """Verify primal feasibility, dual feasibility and equal objectives."""
        m = len(b)
        lhs = [Fraction(0)] * m
        for j, v in self.primal.items():
            if v < 0:
                return False
            for i in range(m):
                lhs[i] += columns[j][i] * v
        if lhs != [Fraction(x) for x in b]:
            return False
        for col, c in zip(columns, costs):
            if sum(y * a for y, a in zip(self.dual, col)) > c:
                return False
        primal_obj = sum(costs[j] * v for j, v in self.primal.items())
        dual_obj = sum(y * bi for y, bi in zip(self.dual, b))
        return primal_obj == dual_obj == self.value


def solve_min_cost(columns: Sequence[Sequence[int]], costs: Sequence, b: Sequence[int]) -> LPResult:
    m = len(b)
    n = len(columns)
    costs = [Fraction(c) for c in costs]
    signs = [(-1 if bi < 0 else 1) for bi in b]
    # Tableau rows: n structural columns, m artificial columns, then the rhs.
    T = []
    for i in range(m):
        row = [Fraction(signs[i] * columns[j][i]) for j in range(n)]
        row += [Fraction(1 if k == i else 0) for k in range(m)]
        row.append(Fraction(signs[i] * b[i]))
        T.append(row)
    basis = [n + i for i in range(m)]
    pivots = 0

    def run(cost: list[Fraction], allowed: int) -> None:
        nonlocal pivots
        width = n + m + 1
        # reduced costs r_j = c_j - c_B . T_j, last entry is -objective
        red = list(cost) + [Fraction(0)]
        for i, bi in enumerate(basis):
            cb = cost[bi]
            if cb:
                Ti = T[i]
                for j in range(width):
                    if Ti[j]:
                        red[j] -= cb * Ti[j]
        while True:
            enter = next((j for j in range(allowed) if red[j] < 0), None)
            if enter is None:
                return
            best = None
            for i in range(len(T)):
                a = T[i][enter]
                if a > 0:
                    ratio = T[i][-1] / a
                    key = (ratio, basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                raise Unbounded("objective unbounded below")
            r = best[1]
            _pivot(T, r, enter)
            f = red[enter]
            if f:
                Tr = T[r]
                for j in range(width):
                    if Tr[j]:
                        red[j] -= f * Tr[j]
            basis[r] = enter
            pivots += 1

    phase1 = [Fraction(0)] * n + [Fraction(1)] * m
    run(phase1, n + m)
    if any(T[i][-1] != 0 for i in range(m) if basis[i] >= n):
        raise Infeasible("no nonnegative combination reaches the target")
    # Drive zero-valued artificials out of the basis where possible.
    for i in range(m):
        if basis[i] >= n:
            j = next((j for j in range(n) if T[i][j] != 0), None)
            if j is not None:
                _pivot(T, i, j)
                basis[i] = j
    phase2 = costs + [Fraction(0)] * m
    run(phase2, n)

    primal = {}
    for i, bi in enumerate(basis):
        if bi < n and T[i][-1] != 0:
            primal[bi] = T[i][-1]
    value = sum((costs[j] * v for j, v in primal.items()), Fraction(0))
    # y^T = c_B B^{-1}; B^{-1} sits in the artificial block (rows were sign-flipped).
    cb = [phase2[bi] for bi in basis]
    dual = tuple(
        signs[k] * sum((cb[i] * T[i][n + k] for i in range(m)), Fraction(0)) for k in range(m)
    )
    inverse = tuple(tuple(T[i][n + k] * signs[k] for k in range(m)) for i in range(m))
    return LPResult(value, primal, dual, pivots, tuple(basis), inverse)


def _pivot(T: list[list[Fraction]], r: int, c: int) -> None:
    Tr = T[r]
    p = Tr[c]
    if p != 1:
        Tr[:] = [v / p for v in Tr]
    nz = [j for j, v in enumerate(Tr) if v]
    for i, Ti in enumerate(T):
        if i != r:
            f = Ti[c]
            if f:
                for j in nz:
                    Ti[j] -= f * Tr[j]
