"""Instance generators: extremal chains and seeded random chains.

The cycle construction produces irreducible chains whose stationary lcd
comes with a closed-form prediction, and whose row-lcd product equals the
global lcd raised to n-1.  The absorption construction produces chains whose
absorption lcd meets its bound exactly.  The random generators exist to feed
the verification harness and are deterministic given their seed.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .core import StochasticMatrix, format_rational

__all__ = [
    "GeneratedInstance",
    "fig2_prime_cycle",
    "fig2_variant",
    "fig3_absorption",
    "first_primes",
    "random_chain",
    "random_multichain",
]


@dataclass(frozen=True)
class GeneratedInstance:
    """A generated matrix plus whatever exact predictions the construction
    supplies (stationary vector and lcd for cycles, absorption value and lcd
    for the absorbing family)."""

    matrix: StochasticMatrix
    kind: str
    parameters: dict[str, object] = field(default_factory=dict)
    expected_stationary: tuple[Fraction, ...] | None = None
    expected_stationary_lcd: int | None = None
    expected_absorption_to_last: Fraction | None = None
    expected_absorption_lcd: int | None = None

    def meta(self) -> dict[str, object]:
        """Prediction block for the serialized instance."""
        out: dict[str, object] = {"kind": self.kind}
        out.update({k: str(v) for k, v in self.parameters.items()})
        if self.expected_stationary is not None:
            out["predicted_stationary"] = [
                format_rational(x) for x in self.expected_stationary
            ]
        if self.expected_stationary_lcd is not None:
            out["predicted_stationary_lcd"] = str(self.expected_stationary_lcd)
        if self.expected_absorption_to_last is not None:
            out["predicted_absorption_to_last"] = format_rational(
                self.expected_absorption_to_last
            )
        if self.expected_absorption_lcd is not None:
            out["predicted_absorption_lcd"] = str(self.expected_absorption_lcd)
        return out


def first_primes(count: int) -> list[int]:
    """The first ``count`` primes by trial division (desk-scale sizes)."""
    primes: list[int] = []
    candidate = 2
    while len(primes) < count:
        if all(candidate % p for p in primes if p * p <= candidate):
            primes.append(candidate)
        candidate += 1
    return primes


def _cycle_chain(weights: Sequence[int], denominator: int) -> StochasticMatrix:
    """Cycle chain: state i advances with weight[i]/denominator, otherwise
    stays put; the last state always advances (its weight equals the
    denominator)."""
    n = len(weights)
    rows: list[list[Fraction]] = []
    for i in range(n):
        row = [Fraction(0)] * n
        forward = Fraction(weights[i], denominator)
        row[(i + 1) % n] = forward
        row[i] += 1 - forward
        rows.append(row)
    return StochasticMatrix.from_rows(rows)


def _cycle_predictions(weights: Sequence[int]) -> tuple[tuple[Fraction, ...], int]:
    total_product = math.prod(weights)
    cofactors = [total_product // w for w in weights]
    lcd = sum(cofactors)
    stationary = tuple(Fraction(q, lcd) for q in cofactors)
    return stationary, lcd


def fig2_variant(weights: Sequence[int]) -> GeneratedInstance:
    """Cycle chain from user-supplied pairwise-coprime forward weights.

    The last weight is the common denominator, so the last state advances
    with probability 1.  Pairwise coprimality makes the predicted stationary
    fractions already reduced, hence the predicted lcd is exact.
    """
    p = [int(x) for x in weights]
    n = len(p)
    if n < 2:
        raise ValueError("cycle construction needs at least 2 states")
    denominator = p[-1]
    if any(x < 1 or x > denominator for x in p):
        raise ValueError("weights must satisfy 1 <= p_i <= p_n")
    for i in range(n):
        for j in range(i + 1, n):
            if math.gcd(p[i], p[j]) != 1:
                raise ValueError(
                    f"weights must be pairwise coprime; gcd(p_{i+1}, p_{j+1}) > 1"
                )
    stationary, lcd = _cycle_predictions(p)
    return GeneratedInstance(
        matrix=_cycle_chain(p, denominator),
        kind="fig2-variant",
        parameters={"n": n, "weights": ",".join(str(x) for x in p)},
        expected_stationary=stationary,
        expected_stationary_lcd=lcd,
    )


def fig2_prime_cycle(
    n: int, q: int, factorial_bit_cap: int = 100_000
) -> GeneratedInstance:
    """Cycle chain built from shifted primes: p_i = m_q! + m_i.

    Requires q >= n.  The shifts keep the weights pairwise coprime, so the
    exact stationary lcd prediction applies.  The factorial growth is capped
    by ``factorial_bit_cap`` bits to keep runs accountable.
    """
    if n < 2:
        raise ValueError("cycle construction needs at least 2 states")
    if q < n:
        raise ValueError(f"q must be at least n (got n={n}, q={q})")
    primes = first_primes(q)
    base = math.factorial(primes[q - 1])
    if base.bit_length() > factorial_bit_cap:
        raise ValueError(
            f"{primes[q - 1]}! needs {base.bit_length()} bits,"
            f" cap is {factorial_bit_cap}"
        )
    weights = [base + primes[i] for i in range(n)]
    stationary, lcd = _cycle_predictions(weights)
    return GeneratedInstance(
        matrix=_cycle_chain(weights, weights[-1]),
        kind="fig2",
        parameters={"n": n, "q": q, "denominator": weights[-1]},
        expected_stationary=stationary,
        expected_stationary_lcd=lcd,
    )


def fig3_absorption(n: int, m: int) -> GeneratedInstance:
    """Absorbing chain whose absorption lcd meets its bound exactly.

    States 0..n-3 are transient: each advances along the line with
    probability 1/m (the last one jumping to the final absorbing state) and
    otherwise drops into the near absorbing state n-2.  State n-1 is reached
    from state 0 with probability exactly 1/m^(n-2).
    """
    if n < 3:
        raise ValueError("absorption construction needs at least 3 states")
    if m < 2:
        raise ValueError("denominator must be at least 2")
    step = Fraction(1, m)
    rows: list[list[Fraction]] = []
    for i in range(n - 2):
        row = [Fraction(0)] * n
        row[i + 1 if i < n - 3 else n - 1] = step
        row[n - 2] += 1 - step
        rows.append(row)
    for sink in (n - 2, n - 1):
        row = [Fraction(0)] * n
        row[sink] = Fraction(1)
        rows.append(row)
    lcd = m ** (n - 2)
    return GeneratedInstance(
        matrix=StochasticMatrix.from_rows(rows),
        kind="fig3",
        parameters={"n": n, "m": m},
        expected_absorption_to_last=Fraction(1, lcd),
        expected_absorption_lcd=lcd,
    )


def _random_row(
    rng: random.Random, n: int, m: int, density: float
) -> list[Fraction]:
    """One stochastic row: random support, numerators summing to m."""
    support = [j for j in range(n) if rng.random() < density]
    if not support:
        support = [rng.randrange(n)]
    if len(support) > m:
        support = sorted(rng.sample(support, m))
    size = len(support)
    if size == 1:
        parts = [m]
    else:
        cuts = sorted(rng.sample(range(1, m), size - 1))
        parts = [b - a for a, b in zip([0] + cuts, cuts + [m])]
    row = [Fraction(0)] * n
    for j, part in zip(support, parts):
        row[j] = Fraction(part, m)
    return row


def random_chain(
    n: int, m: int, density: float = 0.5, seed: int = 0
) -> StochasticMatrix:
    """Seeded random chain; every row lcd divides ``m``.

    Row supports have expected size ``density * n`` (never empty, never
    larger than ``m``).  Byte-identical for identical arguments.
    """
    if n < 1 or m < 1:
        raise ValueError("need n >= 1 and m >= 1")
    if not 0 < density <= 1:
        raise ValueError("density must be in (0, 1]")
    rng = random.Random(seed)
    return StochasticMatrix.from_rows(
        [_random_row(rng, n, m, density) for _ in range(n)]
    )


def random_multichain(
    n: int, m: int, density: float = 0.5, seed: int = 0, absorbing: int = 2
) -> StochasticMatrix:
    """Seeded random chain with at least ``absorbing`` recurrent classes.

    The first ``absorbing`` states are absorbing (each a singleton recurrent
    class); remaining rows are random over all states.
    """
    if absorbing < 2:
        raise ValueError("a multichain needs at least 2 pinned classes")
    if n < absorbing:
        raise ValueError(f"need n >= {absorbing} states")
    if m < 1:
        raise ValueError("need m >= 1")
    rng = random.Random(seed)
    rows: list[list[Fraction]] = []
    for i in range(absorbing):
        row = [Fraction(0)] * n
        row[i] = Fraction(1)
        rows.append(row)
    for _ in range(absorbing, n):
        rows.append(_random_row(rng, n, m, density))
    return StochasticMatrix.from_rows(rows)
