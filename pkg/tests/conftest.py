"""Shared fixtures and hypothesis strategies for the test-suite."""

from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import strategies as st

from chainlcd.core import StochasticMatrix
from chainlcd.generators import fig2_variant, fig3_absorption


@st.composite
def stochastic_rows(draw, n: int, max_denominator: int = 12) -> tuple[Fraction, ...]:
    """One exact stochastic row with an arbitrary denominator and support."""
    denominator = draw(st.integers(min_value=1, max_value=max_denominator))
    size = draw(st.integers(min_value=1, max_value=min(n, denominator)))
    support = sorted(
        draw(
            st.sets(
                st.integers(min_value=0, max_value=n - 1),
                min_size=size,
                max_size=size,
            )
        )
    )
    if size == 1:
        parts = [denominator]
    else:
        cuts = sorted(
            draw(
                st.sets(
                    st.integers(min_value=1, max_value=denominator - 1),
                    min_size=size - 1,
                    max_size=size - 1,
                )
            )
        )
        parts = [b - a for a, b in zip([0] + cuts, cuts + [denominator])]
    row = [Fraction(0)] * n
    for j, part in zip(support, parts):
        row[j] = Fraction(part, denominator)
    return tuple(row)


@st.composite
def stochastic_matrices(
    draw, min_n: int = 1, max_n: int = 5, max_denominator: int = 12
) -> StochasticMatrix:
    n = draw(st.integers(min_value=min_n, max_value=max_n))
    rows = tuple(draw(stochastic_rows(n, max_denominator)) for _ in range(n))
    return StochasticMatrix(rows)


@pytest.fixture
def symmetric_two_state() -> StochasticMatrix:
    half = Fraction(1, 2)
    return StochasticMatrix(((half, half), (half, half)))


@pytest.fixture
def absorbing_two_state() -> StochasticMatrix:
    """One absorbing state, one leaky state."""
    return StochasticMatrix.from_rows([["1", "0"], ["1/3", "2/3"]])


@pytest.fixture
def fig3_4_3() -> StochasticMatrix:
    return fig3_absorption(4, 3).matrix


@pytest.fixture
def fig2_345() -> StochasticMatrix:
    return fig2_variant([3, 4, 5]).matrix
