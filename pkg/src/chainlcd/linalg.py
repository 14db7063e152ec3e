"""Fraction-free exact linear algebra over rationals.

Systems are solved by clearing denominators row-wise and running Bareiss
elimination over the integers (each division in the update is exact, which
keeps intermediate entries at determinant-minor size instead of blowing up
like naive cross-multiplication).  Back substitution reintroduces fractions
only for the final values.

This module also hosts the two chain-specific solves that serve as the
linear-algebra counterparts of the combinatorial formulas: the fundamental
matrix of an open set and the stationary distribution of an irreducible
chain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .core import ChainError, StochasticMatrix
from .structure import NotIrreducibleError, NotOpenError, is_irreducible, is_open

__all__ = [
    "FundamentalMatrix",
    "SingularMatrixError",
    "det",
    "fundamental_matrix",
    "invert",
    "solve",
    "stationary_by_solve",
]


class SingularMatrixError(ChainError):
    """The coefficient matrix is singular; carries the rank that was found."""

    def __init__(self, rank: int, size: int):
        super().__init__(f"singular matrix: rank {rank} < {size}")
        self.rank = rank
        self.size = size


def _integer_rows(rows: Sequence[Sequence[Fraction]]) -> tuple[list[list[int]], list[int]]:
    """Scale each row by its lcd; returns integer rows plus the scale factors."""
    scaled: list[list[int]] = []
    scales: list[int] = []
    for row in rows:
        scale = math.lcm(*(x.denominator for x in row)) if row else 1
        scaled.append([int(x * scale) for x in row])
        scales.append(scale)
    return scaled, scales


def _bareiss_echelon(rows: list[list[int]], pivot_col_limit: int) -> tuple[list[int], int]:
    """In-place fraction-free echelon form.

    Only the first ``pivot_col_limit`` columns are eligible as pivots; any
    further columns are treated as augmented right-hand sides.  Returns the
    pivot column list and the sign accumulated from row swaps.
    """
    n = len(rows)
    m = len(rows[0]) if n else 0
    pivots: list[int] = []
    sign = 1
    prev = 1
    r = 0
    for c in range(pivot_col_limit):
        if r == n:
            break
        pivot_row = next((i for i in range(r, n) if rows[i][c] != 0), None)
        if pivot_row is None:
            continue
        if pivot_row != r:
            rows[r], rows[pivot_row] = rows[pivot_row], rows[r]
            sign = -sign
        pivot = rows[r][c]
        for i in range(r + 1, n):
            factor = rows[i][c]
            row_i = rows[i]
            row_r = rows[r]
            for j in range(c + 1, m):
                value = pivot * row_i[j] - factor * row_r[j]
                quotient, remainder = divmod(value, prev)
                if remainder:
                    raise ArithmeticError("fraction-free elimination lost exactness")
                row_i[j] = quotient
            row_i[c] = 0
        prev = pivot
        pivots.append(c)
        r += 1
    return pivots, sign


def det(rows: Sequence[Sequence[Fraction]]) -> Fraction:
    """Exact determinant of a square rational matrix (empty matrix gives 1)."""
    n = len(rows)
    if n == 0:
        return Fraction(1)
    if any(len(row) != n for row in rows):
        raise ValueError("determinant requires a square matrix")
    scaled, scales = _integer_rows(rows)
    pivots, sign = _bareiss_echelon(scaled, n)
    if len(pivots) < n:
        return Fraction(0)
    return Fraction(sign * scaled[n - 1][n - 1], math.prod(scales))


def solve(
    a_rows: Sequence[Sequence[Fraction]], b: Sequence[Fraction]
) -> tuple[Fraction, ...]:
    """Solve A x = b exactly for square A; raises on a singular matrix."""
    n = len(a_rows)
    if any(len(row) != n for row in a_rows):
        raise ValueError("solve requires a square coefficient matrix")
    if len(b) != n:
        raise ValueError(f"right-hand side has {len(b)} entries, expected {n}")
    augmented = [list(row) + [rhs] for row, rhs in zip(a_rows, b)]
    scaled, _ = _integer_rows(augmented)
    pivots, _ = _bareiss_echelon(scaled, n)
    if len(pivots) < n:
        raise SingularMatrixError(rank=len(pivots), size=n)
    solution = [Fraction(0)] * n
    for i in reversed(range(n)):
        acc = Fraction(scaled[i][n])
        for j in range(i + 1, n):
            acc -= scaled[i][j] * solution[j]
        solution[i] = acc / scaled[i][i]
    return tuple(solution)


def invert(rows: Sequence[Sequence[Fraction]]) -> tuple[tuple[Fraction, ...], ...]:
    """Exact inverse of a square rational matrix."""
    n = len(rows)
    if any(len(row) != n for row in rows):
        raise ValueError("invert requires a square matrix")
    augmented = [
        list(row) + [Fraction(1 if i == j else 0) for j in range(n)]
        for i, row in enumerate(rows)
    ]
    scaled, _ = _integer_rows(augmented)
    pivots, _ = _bareiss_echelon(scaled, n)
    if len(pivots) < n:
        raise SingularMatrixError(rank=len(pivots), size=n)
    columns: list[list[Fraction]] = []
    for k in range(n):
        x = [Fraction(0)] * n
        for i in reversed(range(n)):
            acc = Fraction(scaled[i][n + k])
            for j in range(i + 1, n):
                acc -= scaled[i][j] * x[j]
            x[i] = acc / scaled[i][i]
        columns.append(x)
    return tuple(tuple(columns[k][i] for k in range(n)) for i in range(n))


@dataclass(frozen=True)
class FundamentalMatrix:
    """Expected visit counts inside an open set before first escape.

    ``states`` lists the open set in increasing order and ``values[a][b]``
    is the expected number of visits to ``states[b]`` for a chain started
    at ``states[a]``, counted up to the first exit.
    """

    states: tuple[int, ...]
    values: tuple[tuple[Fraction, ...], ...]

    def visit_count(self, start: int, target: int) -> Fraction:
        return self.values[self.states.index(start)][self.states.index(target)]

    @property
    def max_entry(self) -> Fraction:
        return max(x for row in self.values for x in row)


def fundamental_matrix(
    matrix: StochasticMatrix, open_states: Sequence[int]
) -> FundamentalMatrix:
    """Invert I - P restricted to an open set.

    Openness is required: it guarantees the restricted I - P is invertible
    and that the entries really are expected visit counts.
    """
    states = tuple(sorted(set(open_states)))
    if not is_open(matrix, states):
        raise NotOpenError(f"state set {list(states)} is not open")
    size = len(states)
    restricted = [
        [
            (Fraction(1) if a == b else Fraction(0)) - matrix.rows[states[a]][states[b]]
            for b in range(size)
        ]
        for a in range(size)
    ]
    return FundamentalMatrix(states=states, values=invert(restricted))


def stationary_by_solve(matrix: StochasticMatrix) -> tuple[Fraction, ...]:
    """Stationary distribution of an irreducible chain by direct solve.

    Builds the balance equations (transposed) and swaps the equation of the
    largest state index for the normalization constraint, which is always
    nonsingular for irreducible chains.
    """
    if not is_irreducible(matrix):
        raise NotIrreducibleError("stationary distribution requires irreducibility")
    n = matrix.n
    if n == 1:
        return (Fraction(1),)
    a_rows: list[list[Fraction]] = [
        [matrix.rows[j][i] - (Fraction(1) if i == j else Fraction(0)) for j in range(n)]
        for i in range(n)
    ]
    a_rows[n - 1] = [Fraction(1)] * n
    rhs = [Fraction(0)] * (n - 1) + [Fraction(1)]
    return solve(a_rows, rhs)
