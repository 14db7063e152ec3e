"""Exact rational stochastic matrices and their denominator statistics.

Every scalar in this package is a ``fractions.Fraction``, which guarantees
canonical reduced form (gcd(|num|, den) = 1, den >= 1) after each operation.
A :class:`StochasticMatrix` validates exact row sums on construction, so any
instance that exists is a genuine transition kernel.

The denominator statistics collected here drive all bound checks:

* ``row_lcds[i]``   lowest common denominator of row i (canonical entries),
* ``global_lcd``    lcm of all entry denominators,
* ``row_lcd_product``  product of the row lcds,
* ``nondeterministic_rows``  number of rows with at least two nonzero entries.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

__all__ = [
    "ChainError",
    "InstanceFormatError",
    "DenominatorStats",
    "Instance",
    "StochasticMatrix",
    "denominator_stats",
    "format_rational",
    "lcd_of_vector",
    "parse_instance",
    "parse_matrix",
    "parse_rational",
    "serialize_instance",
]

_RATIONAL_RE = re.compile(r"^[+-]?\d+(?:/[+-]?\d+)?$")

ZERO = Fraction(0)
ONE = Fraction(1)


class ChainError(Exception):
    """Base class for all errors raised by this package."""


class InstanceFormatError(ChainError):
    """Malformed instance text: bad literal, bad shape, or broken invariant."""


def parse_rational(text: str) -> Fraction:
    """Parse a rational literal of the form ``"a/b"`` or ``"a"``.

    The denominator may carry a sign in the input; the result is canonical
    with a positive denominator.  A zero denominator is rejected.
    """
    if not isinstance(text, str) or not _RATIONAL_RE.match(text.strip()):
        raise InstanceFormatError(f"malformed rational literal: {text!r}")
    body = text.strip()
    if "/" in body:
        num_text, den_text = body.split("/", 1)
        num, den = int(num_text), int(den_text)
        if den == 0:
            raise InstanceFormatError(f"zero denominator in rational literal: {text!r}")
        return Fraction(num, den)
    return Fraction(int(body))


def format_rational(value: Fraction) -> str:
    """Render a Fraction as ``"a/b"``, or ``"a"`` when the denominator is 1."""
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def _coerce_entry(value: object) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rational(value)
    raise InstanceFormatError(f"unsupported matrix entry {value!r}")


@dataclass(frozen=True)
class StochasticMatrix:
    """An n x n matrix of exact rationals whose rows each sum to exactly 1.

    Immutable; all derived analysis treats it as a shared read-only value.
    """

    rows: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self) -> None:
        n = len(self.rows)
        if n == 0:
            raise InstanceFormatError("matrix must have at least one row")
        for i, row in enumerate(self.rows):
            if len(row) != n:
                raise InstanceFormatError(
                    f"non-square grid: row {i} has {len(row)} entries, expected {n}"
                )
            for j, entry in enumerate(row):
                if not isinstance(entry, Fraction):
                    raise InstanceFormatError(f"entry ({i},{j}) is not a Fraction")
                if entry < ZERO or entry > ONE:
                    raise InstanceFormatError(
                        f"entry ({i},{j}) = {format_rational(entry)} outside [0, 1]"
                    )
            total = sum(row, start=ZERO)
            if total != ONE:
                deficit = ONE - total
                raise InstanceFormatError(
                    f"row {i} sums to {format_rational(total)}"
                    f" (deficit {format_rational(deficit)})"
                )

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[object]]) -> "StochasticMatrix":
        """Build a matrix from rows of Fractions, ints, or rational strings."""
        grid = tuple(tuple(_coerce_entry(x) for x in row) for row in rows)
        return cls(grid)

    @property
    def n(self) -> int:
        return len(self.rows)

    def entry(self, i: int, j: int) -> Fraction:
        return self.rows[i][j]

    def row(self, i: int) -> tuple[Fraction, ...]:
        return self.rows[i]

    def successors(self, i: int) -> tuple[int, ...]:
        """States j with a positive transition probability from i."""
        return tuple(j for j, p in enumerate(self.rows[i]) if p > ZERO)

    def edges(self) -> tuple[tuple[int, int], ...]:
        """All ordered pairs (i, j) with a positive transition probability."""
        return tuple(
            (i, j) for i in range(self.n) for j in range(self.n) if self.rows[i][j] > ZERO
        )

    def to_string_rows(self) -> list[list[str]]:
        return [[format_rational(x) for x in row] for row in self.rows]


@dataclass(frozen=True)
class Instance:
    """A parsed problem instance: a matrix plus an optional reward vector."""

    matrix: StochasticMatrix
    rewards: tuple[int, ...] | None = None
    meta: Mapping[str, object] | None = None


def _parse_reward(value: object) -> int:
    if isinstance(value, bool):
        raise InstanceFormatError(f"reward entries must be integers, got {value!r}")
    if isinstance(value, int):
        return value
    if isinstance(value, str):
        body = value.strip()
        if not re.match(r"^[+-]?\d+$", body):
            raise InstanceFormatError(f"malformed reward literal: {value!r}")
        return int(body)
    raise InstanceFormatError(f"reward entries must be integers, got {value!r}")


def parse_instance(text: str) -> Instance:
    """Parse the JSON instance format.

    The object must contain key ``"P"`` (an n x n grid of rational strings)
    and may contain ``"r"`` (n integer strings) and a ``"meta"`` object,
    which is carried through unvalidated.  Unknown keys are ignored.
    """
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"invalid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise InstanceFormatError("instance must be a JSON object")
    if "P" not in payload:
        raise InstanceFormatError('instance is missing required key "P"')
    grid = payload["P"]
    if not isinstance(grid, list) or not all(isinstance(row, list) for row in grid):
        raise InstanceFormatError('"P" must be an array of arrays')
    matrix = StochasticMatrix.from_rows(grid)

    rewards: tuple[int, ...] | None = None
    if payload.get("r") is not None:
        raw = payload["r"]
        if not isinstance(raw, list):
            raise InstanceFormatError('"r" must be an array of integers')
        rewards = tuple(_parse_reward(x) for x in raw)
        if len(rewards) != matrix.n:
            raise InstanceFormatError(
                f'"r" has {len(rewards)} entries, expected {matrix.n}'
            )
    meta = payload.get("meta") if isinstance(payload.get("meta"), dict) else None
    return Instance(matrix=matrix, rewards=rewards, meta=meta)


def parse_matrix(text: str) -> StochasticMatrix:
    """Parse an instance and return only its validated matrix."""
    return parse_instance(text).matrix


def serialize_instance(
    matrix: StochasticMatrix,
    rewards: Sequence[int] | None = None,
    meta: Mapping[str, object] | None = None,
) -> str:
    """Serialize to the JSON instance format (sorted keys, deterministic)."""
    payload: dict[str, object] = {"P": matrix.to_string_rows()}
    if rewards is not None:
        if len(rewards) != matrix.n:
            raise InstanceFormatError(
                f"reward vector has {len(rewards)} entries, expected {matrix.n}"
            )
        payload["r"] = [str(int(x)) for x in rewards]
    if meta is not None:
        payload["meta"] = dict(meta)
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


@dataclass(frozen=True)
class DenominatorStats:
    """Row and global lowest common denominators of a stochastic matrix."""

    row_lcds: tuple[int, ...]
    global_lcd: int
    row_lcd_product: int
    nondeterministic_rows: int

    @property
    def n(self) -> int:
        return len(self.row_lcds)


def lcd_of_vector(values: Iterable[Fraction]) -> int:
    """Lowest common denominator of canonical-form rationals (lcm of dens)."""
    denominators = [v.denominator for v in values]
    if not denominators:
        raise ValueError("lcd of an empty vector is undefined")
    return math.lcm(*denominators)


def denominator_stats(matrix: StochasticMatrix) -> DenominatorStats:
    """Compute row lcds, the global lcd, their product, and the count of
    rows with at least two nonzero entries.

    Canonical forms decide the lcds, so "2/4" contributes a denominator of 2.
    """
    row_lcds = tuple(lcd_of_vector(row) for row in matrix.rows)
    global_lcd = math.lcm(*row_lcds)
    product = math.prod(row_lcds)
    nondet = sum(
        1 for row in matrix.rows if sum(1 for x in row if x > ZERO) >= 2
    )
    return DenominatorStats(
        row_lcds=row_lcds,
        global_lcd=global_lcd,
        row_lcd_product=product,
        nondeterministic_rows=nondet,
    )
