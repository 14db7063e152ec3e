"""Parsing, validation, serialization, and denominator statistics."""

from fractions import Fraction

import pytest
from hypothesis import given, settings

from chainlcd.core import (
    InstanceFormatError,
    StochasticMatrix,
    denominator_stats,
    format_rational,
    lcd_of_vector,
    parse_instance,
    parse_matrix,
    parse_rational,
    serialize_instance,
)

from conftest import stochastic_matrices


class TestParseRational:
    def test_plain_fraction(self):
        assert parse_rational("1/2") == Fraction(1, 2)

    def test_integer(self):
        assert parse_rational("3") == Fraction(3)

    def test_sign_normalization(self):
        assert parse_rational("3/-4") == Fraction(-3, 4)
        assert parse_rational("-3/-4") == Fraction(3, 4)

    def test_unreduced_input_canonicalizes(self):
        assert parse_rational("2/4") == Fraction(1, 2)

    @pytest.mark.parametrize("bad", ["", "0.5", "a", "1/", "/2", "1/0", "1 / 2"])
    def test_malformed(self, bad):
        with pytest.raises(InstanceFormatError):
            parse_rational(bad)

    def test_format_round_trip(self):
        for text in ["1/2", "-7/3", "0", "5"]:
            assert format_rational(parse_rational(text)) == text


class TestParseMatrix:
    def test_symmetric_two_state(self):
        m = parse_matrix('{"P":[["1/2","1/2"],["1/2","1/2"]]}')
        assert m.n == 2
        assert all(x == Fraction(1, 2) for row in m.rows for x in row)

    def test_row_sum_error_reports_row_and_deficit(self):
        with pytest.raises(InstanceFormatError, match=r"row 0 sums to 5/6"):
            parse_matrix('{"P":[["1/2","1/3"],["0","1"]]}')

    def test_absorbing_chain_accepted(self):
        m = parse_matrix('{"P":[["1","0"],["1/3","2/3"]]}')
        assert m.rows[0][0] == 1

    def test_entry_out_of_range(self):
        with pytest.raises(InstanceFormatError, match="outside"):
            parse_matrix('{"P":[["3/2","-1/2"],["0","1"]]}')

    def test_non_square(self):
        with pytest.raises(InstanceFormatError, match="non-square"):
            parse_matrix('{"P":[["1/2","1/2"],["1"]]}')

    def test_missing_key(self):
        with pytest.raises(InstanceFormatError, match='"P"'):
            parse_matrix('{"Q":[["1"]]}')

    def test_invalid_json(self):
        with pytest.raises(InstanceFormatError, match="invalid JSON"):
            parse_matrix("{")

    def test_unknown_keys_ignored(self):
        m = parse_matrix('{"P":[["1"]],"meta":{"kind":"x"},"other":1}')
        assert m.n == 1

    def test_rewards_parsed(self):
        inst = parse_instance('{"P":[["1","0"],["1/3","2/3"]],"r":["1","-2"]}')
        assert inst.rewards == (1, -2)

    def test_rewards_accept_bare_integers(self):
        inst = parse_instance('{"P":[["1"]],"r":[4]}')
        assert inst.rewards == (4,)

    def test_rewards_length_mismatch(self):
        with pytest.raises(InstanceFormatError, match="expected 2"):
            parse_instance('{"P":[["1","0"],["1/3","2/3"]],"r":["1"]}')

    def test_rewards_must_be_integers(self):
        with pytest.raises(InstanceFormatError):
            parse_instance('{"P":[["1"]],"r":["1/2"]}')


class TestDenominatorStats:
    def test_symmetric(self, symmetric_two_state):
        stats = denominator_stats(symmetric_two_state)
        assert stats.row_lcds == (2, 2)
        assert stats.global_lcd == 2
        assert stats.row_lcd_product == 4
        assert stats.nondeterministic_rows == 2

    def test_absorbing(self, absorbing_two_state):
        stats = denominator_stats(absorbing_two_state)
        assert stats.row_lcds == (1, 3)
        assert stats.global_lcd == 3
        assert stats.row_lcd_product == 3
        assert stats.nondeterministic_rows == 1

    def test_fig3_rows(self, fig3_4_3):
        stats = denominator_stats(fig3_4_3)
        assert stats.row_lcds == (3, 3, 1, 1)
        assert stats.global_lcd == 3

    def test_written_form_does_not_matter(self):
        a = parse_matrix('{"P":[["1/2","1/2"],["1/2","1/2"]]}')
        b = parse_matrix('{"P":[["2/4","2/4"],["3/6","3/6"]]}')
        assert denominator_stats(a) == denominator_stats(b)


class TestLcdOfVector:
    def test_mixed_denominators(self):
        assert lcd_of_vector([Fraction(1, 2), Fraction(1, 3)]) == 6

    def test_common_prime_denominator(self):
        # 47 is prime and none of the numerators is a multiple of it,
        # so each fraction is already reduced and the lcm is 47 itself.
        vec = [Fraction(20, 47), Fraction(15, 47), Fraction(12, 47)]
        assert lcd_of_vector(vec) == 47

    def test_integers(self):
        assert lcd_of_vector([Fraction(1), Fraction(0)]) == 1

    def test_empty(self):
        with pytest.raises(ValueError):
            lcd_of_vector([])


def _prime_factors(value: int) -> set[int]:
    factors = set()
    p = 2
    while p * p <= value:
        while value % p == 0:
            factors.add(p)
            value //= p
        p += 1
    if value > 1:
        factors.add(value)
    return factors


@given(stochastic_matrices(max_n=5))
@settings(max_examples=150, deadline=None)
def test_round_trip(matrix):
    assert parse_instance(serialize_instance(matrix)).matrix == matrix


@given(stochastic_matrices(max_n=5))
@settings(max_examples=150, deadline=None)
def test_denominator_inequalities(matrix):
    stats = denominator_stats(matrix)
    n, m = stats.n, stats.global_lcd
    d, k = stats.row_lcd_product, stats.nondeterministic_rows
    assert m <= d <= m**k
    assert min(n * d, n * m ** max(n - 1, 0)) <= n * m ** min(k, max(n - 1, 0))


@given(stochastic_matrices(max_n=5))
@settings(max_examples=100, deadline=None)
def test_lcd_clears_denominators_minimally(matrix):
    for row in matrix.rows:
        lcd = lcd_of_vector(row)
        assert all((x * lcd).denominator == 1 for x in row)
        for p in _prime_factors(lcd):
            smaller = lcd // p
            assert any((x * smaller).denominator != 1 for x in row)


def test_serialize_deterministic(fig3_4_3):
    assert serialize_instance(fig3_4_3) == serialize_instance(fig3_4_3)
    assert serialize_instance(fig3_4_3).endswith("\n")


def test_single_state_matrix():
    m = StochasticMatrix.from_rows([["1"]])
    stats = denominator_stats(m)
    assert (stats.global_lcd, stats.row_lcd_product, stats.nondeterministic_rows) == (1, 1, 0)
