"""Bound verdicts: observed lcds and norms against their proven caps."""

from fractions import Fraction

from chainlcd.analysis import absorption_by_fundamental, bias, gain
from chainlcd.bounds import (
    absorption_bound_value,
    check_absorption_bound,
    check_bias_bounds,
    check_gain_bounds,
    check_stationary_bound,
    check_visit_cap,
    hadamard_comparison,
    stationary_bound_value,
)
from chainlcd.core import DenominatorStats, StochasticMatrix, denominator_stats
from chainlcd.linalg import fundamental_matrix, stationary_by_solve
from chainlcd.structure import decompose

F = Fraction


def _by_name(checks, name):
    (match,) = [c for c in checks if c.name == name]
    return match


class TestStationaryBound:
    def test_symmetric(self, symmetric_two_state):
        pi = stationary_by_solve(symmetric_two_state)
        stats = denominator_stats(symmetric_two_state)
        check = _by_name(check_stationary_bound(pi, stats), "stationary_lcd")
        assert (check.observed, check.bound, check.passed) == (2, 4, True)

    def test_cycle_chain_ratio(self, fig2_345):
        pi = stationary_by_solve(fig2_345)
        stats = denominator_stats(fig2_345)
        check = _by_name(check_stationary_bound(pi, stats), "stationary_lcd")
        assert (check.observed, check.bound) == (47, 75)
        assert check.tightness == F(47, 75)
        assert check.passed

    def test_single_state(self):
        m = StochasticMatrix.from_rows([["1"]])
        stats = denominator_stats(m)
        check = _by_name(
            check_stationary_bound([F(1)], stats), "stationary_lcd"
        )
        assert (check.observed, check.bound, check.passed) == (1, 1, True)
        assert check.tightness == 1

    def test_binding_side_recorded(self):
        stats = DenominatorStats(
            row_lcds=(5, 5, 1), global_lcd=5, row_lcd_product=25,
            nondeterministic_rows=2,
        )
        bound, binding = stationary_bound_value(stats)
        assert bound == 75
        assert binding == "row_lcd_product"  # tie resolves to the product side


class TestAbsorptionBound:
    def test_fig3_is_tight(self, fig3_4_3):
        table = absorption_by_fundamental(fig3_4_3)
        stats = denominator_stats(fig3_4_3)
        structure = decompose(fig3_4_3)
        check = _by_name(
            check_absorption_bound(table, stats, structure), "absorption_lcd"
        )
        assert (check.observed, check.bound) == (9, 9)
        assert check.tightness == 1
        assert check.passed

    def test_irreducible_trivial(self, symmetric_two_state):
        table = absorption_by_fundamental(symmetric_two_state)
        stats = denominator_stats(symmetric_two_state)
        structure = decompose(symmetric_two_state)
        check = _by_name(
            check_absorption_bound(table, stats, structure), "absorption_lcd"
        )
        assert check.observed == 1
        assert check.passed

    def test_single_recurrent_state(self, absorbing_two_state):
        table = absorption_by_fundamental(absorbing_two_state)
        stats = denominator_stats(absorbing_two_state)
        structure = decompose(absorbing_two_state)
        check = _by_name(
            check_absorption_bound(table, stats, structure), "absorption_lcd"
        )
        assert check.observed == 1
        assert check.passed

    def test_bound_value_min_sides(self, fig3_4_3):
        stats = denominator_stats(fig3_4_3)
        structure = decompose(fig3_4_3)
        bound, binding = absorption_bound_value(stats, structure)
        assert bound == 9
        assert binding == "transient_row_lcd_product"


class TestGainBounds:
    def test_fig3_squared_form(self, fig3_4_3):
        result = gain(fig3_4_3, (0, 0, 0, 1))
        stats = denominator_stats(fig3_4_3)
        structure = decompose(fig3_4_3)
        checks = check_gain_bounds(result, stats, structure)
        squared = _by_name(checks, "gain_lcd_squared")
        assert (squared.observed, squared.bound, squared.passed) == (81, 729, True)
        product = _by_name(checks, "gain_lcd_class_product")
        assert (product.observed, product.bound, product.passed) == (9, 9, True)

    def test_zero_reward(self, fig3_4_3):
        result = gain(fig3_4_3, (0, 0, 0, 0))
        stats = denominator_stats(fig3_4_3)
        structure = decompose(fig3_4_3)
        squared = _by_name(
            check_gain_bounds(result, stats, structure), "gain_lcd_squared"
        )
        assert squared.observed == 1
        assert squared.passed

    def test_ergodic_denominator(self, symmetric_two_state):
        result = gain(symmetric_two_state, (1, 0))
        stats = denominator_stats(symmetric_two_state)
        structure = decompose(symmetric_two_state)
        check = _by_name(
            check_gain_bounds(result, stats, structure), "ergodic_gain_denominator"
        )
        assert (check.observed, check.bound, check.passed) == (2, 4, True)

    def test_no_ergodic_check_when_not_constant(self, fig3_4_3):
        result = gain(fig3_4_3, (0, 0, 0, 1))
        stats = denominator_stats(fig3_4_3)
        structure = decompose(fig3_4_3)
        names = [c.name for c in check_gain_bounds(result, stats, structure)]
        assert "ergodic_gain_denominator" not in names


class TestBiasBounds:
    def test_alternating_anchored(self):
        m = StochasticMatrix.from_rows([["0", "1"], ["1", "0"]])
        result = bias(m, (1, 0), "anchored", anchors=[1])
        stats = denominator_stats(m)
        check = _by_name(
            check_bias_bounds(result, (1, 0), stats), "bias_sup_norm_anchored"
        )
        assert (check.observed, check.bound, check.passed) == (F(1, 2), 4, True)

    def test_alternating_weighted(self):
        m = StochasticMatrix.from_rows([["0", "1"], ["1", "0"]])
        result = bias(m, (1, 0), "weighted")
        stats = denominator_stats(m)
        check = _by_name(
            check_bias_bounds(result, (1, 0), stats), "bias_sup_norm_weighted"
        )
        assert (check.observed, check.bound, check.passed) == (F(1, 4), 8, True)

    def test_zero_reward_zero_bound(self, fig3_4_3):
        result = bias(fig3_4_3, (0, 0, 0, 0))
        stats = denominator_stats(fig3_4_3)
        check = _by_name(
            check_bias_bounds(result, (0, 0, 0, 0), stats),
            "bias_sup_norm_anchored",
        )
        assert check.observed == 0
        assert check.bound == 0
        assert check.passed
        assert check.tightness is None


class TestVisitCap:
    def test_fig3_transient_block(self, fig3_4_3):
        fm = fundamental_matrix(fig3_4_3, [0, 1])
        stats = denominator_stats(fig3_4_3)
        check = check_visit_cap(fm, stats)
        assert (check.observed, check.bound, check.passed) == (F(1), F(9), True)
        assert check.tightness == F(1, 9)


class TestHadamardComparison:
    def test_three_state_dense_form(self):
        stats = DenominatorStats(
            row_lcds=(5, 5, 1), global_lcd=5, row_lcd_product=25,
            nondeterministic_rows=2,
        )
        dense = _by_name(hadamard_comparison(stats), "tree_bound_vs_hadamard")
        assert dense.observed == 75 * 75
        assert dense.bound == 27 * 5**6
        assert dense.passed

    def test_two_state_support_form(self):
        stats = DenominatorStats(
            row_lcds=(2, 2), global_lcd=2, row_lcd_product=4,
            nondeterministic_rows=2,
        )
        support = _by_name(
            hadamard_comparison(stats), "tree_bound_vs_hadamard_support"
        )
        # Tree-formula bound is min(2*4, 2*2) = 4; the prior support-based
        # bound is k*n*(2M)^(k+1) = 2*2*4^3 = 256.
        assert (support.observed, support.bound, support.passed) == (4, 256, True)

    def test_deterministic_chain_skips_support_bound(self):
        stats = DenominatorStats(
            row_lcds=(1, 1), global_lcd=1, row_lcd_product=1,
            nondeterministic_rows=0,
        )
        support = _by_name(
            hadamard_comparison(stats), "tree_bound_vs_hadamard_support"
        )
        assert support.skipped
        assert support.passed
        assert "deterministic" in support.note


def test_fragments_serialize_to_strings(fig3_4_3):
    stats = denominator_stats(fig3_4_3)
    structure = decompose(fig3_4_3)
    table = absorption_by_fundamental(fig3_4_3)
    for check in check_absorption_bound(table, stats, structure):
        payload = check.to_json()
        assert isinstance(payload["observed"], str)
        assert isinstance(payload["bound"], str)
        assert isinstance(payload["passed"], bool)
