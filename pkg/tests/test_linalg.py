"""Fraction-free elimination, fundamental matrices, stationary solves."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chainlcd.core import StochasticMatrix
from chainlcd.linalg import (
    SingularMatrixError,
    det,
    fundamental_matrix,
    invert,
    solve,
    stationary_by_solve,
)
from chainlcd.structure import NotIrreducibleError, NotOpenError

from conftest import stochastic_matrices

F = Fraction


def det_cofactor(rows):
    """Independent determinant oracle by cofactor expansion (small n)."""
    n = len(rows)
    if n == 0:
        return F(1)
    if n == 1:
        return rows[0][0]
    total = F(0)
    for j in range(n):
        if rows[0][j] == 0:
            continue
        minor = [
            [rows[i][k] for k in range(n) if k != j] for i in range(1, n)
        ]
        sign = -1 if j % 2 else 1
        total += sign * rows[0][j] * det_cofactor(minor)
    return total


def truncated_visit_series(matrix, states, terms):
    """Partial sum of powers of the restricted matrix (exact)."""
    size = len(states)
    sub = [[matrix.rows[a][b] for b in states] for a in states]
    acc = [[F(1 if i == j else 0) for j in range(size)] for i in range(size)]
    power = [row[:] for row in acc]
    for _ in range(terms):
        power = [
            [
                sum((power[i][k] * sub[k][j] for k in range(size)), start=F(0))
                for j in range(size)
            ]
            for i in range(size)
        ]
        acc = [
            [acc[i][j] + power[i][j] for j in range(size)] for i in range(size)
        ]
    return acc


class TestSolve:
    def test_identity(self):
        a = [[F(1), F(0)], [F(0), F(1)]]
        assert solve(a, [F(3), F(-2)]) == (F(3), F(-2))

    def test_scalar(self):
        assert solve([[F(2)]], [F(1)]) == (F(1, 2),)

    def test_geometric_escape(self):
        # I - P restricted to the open set {0} of [[1/2,1/2],[0,1]].
        assert solve([[F(1, 2)]], [F(1)]) == (F(2),)

    def test_three_by_three(self):
        a = [
            [F(2), F(1), F(-1)],
            [F(-3), F(-1), F(2)],
            [F(-2), F(1), F(2)],
        ]
        b = [F(8), F(-11), F(-3)]
        x = solve(a, b)
        assert x == (F(2), F(3), F(-1))

    def test_singular_reports_rank(self):
        with pytest.raises(SingularMatrixError) as excinfo:
            solve([[F(1), F(1)], [F(1), F(1)]], [F(1), F(1)])
        assert excinfo.value.rank == 1

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            solve([[F(1)]], [F(1), F(2)])


class TestDet:
    def test_empty(self):
        assert det([]) == 1

    def test_one_by_one(self):
        assert det([[F(5, 7)]]) == F(5, 7)

    def test_swap_sign(self):
        assert det([[F(0), F(1)], [F(1), F(0)]]) == -1

    def test_singular(self):
        assert det([[F(1), F(2)], [F(2), F(4)]]) == 0


@given(
    st.lists(
        st.lists(st.fractions(min_value=-5, max_value=5, max_denominator=6), min_size=3, max_size=3),
        min_size=3,
        max_size=3,
    )
)
@settings(max_examples=150, deadline=None)
def test_det_matches_cofactor_oracle(rows):
    assert det(rows) == det_cofactor(rows)


@given(
    st.integers(min_value=1, max_value=4),
    st.data(),
)
@settings(max_examples=100, deadline=None)
def test_solve_recovers_known_solution(n, data):
    entry = st.integers(min_value=-6, max_value=6)
    a = data.draw(
        st.lists(st.lists(entry, min_size=n, max_size=n), min_size=n, max_size=n)
    )
    a = [[F(x) for x in row] for row in a]
    x_known = [
        F(data.draw(entry), data.draw(st.integers(min_value=1, max_value=4)))
        for _ in range(n)
    ]
    b = [
        sum((a[i][j] * x_known[j] for j in range(n)), start=F(0)) for i in range(n)
    ]
    if det_cofactor(a) == 0:
        with pytest.raises(SingularMatrixError):
            solve(a, b)
    else:
        assert list(solve(a, b)) == x_known


@given(
    st.integers(min_value=1, max_value=4),
    st.data(),
)
@settings(max_examples=80, deadline=None)
def test_invert_gives_identity(n, data):
    entry = st.integers(min_value=-6, max_value=6)
    a = data.draw(
        st.lists(st.lists(entry, min_size=n, max_size=n), min_size=n, max_size=n)
    )
    a = [[F(x) for x in row] for row in a]
    if det_cofactor(a) == 0:
        with pytest.raises(SingularMatrixError):
            invert(a)
        return
    inv = invert(a)
    product = [
        [
            sum((a[i][k] * inv[k][j] for k in range(n)), start=F(0))
            for j in range(n)
        ]
        for i in range(n)
    ]
    assert product == [[F(1 if i == j else 0) for j in range(n)] for i in range(n)]


class TestFundamentalMatrix:
    def test_geometric(self):
        m = StochasticMatrix.from_rows([["1/2", "1/2"], ["0", "1"]])
        fm = fundamental_matrix(m, [0])
        assert fm.values == ((F(2),),)
        series = truncated_visit_series(m, (0,), terms=60)
        assert abs(fm.values[0][0] - series[0][0]) < F(1, 10**15)

    def test_fig3_transient_block(self, fig3_4_3):
        fm = fundamental_matrix(fig3_4_3, [0, 1])
        assert fm.values == ((F(1), F(1, 3)), (F(0), F(1)))
        series = truncated_visit_series(fig3_4_3, (0, 1), terms=60)
        for i in range(2):
            for j in range(2):
                assert abs(fm.values[i][j] - series[i][j]) < F(1, 10**9)

    def test_self_loop_mean(self):
        # Single open state with return probability q has mean 1/(1-q).
        m = StochasticMatrix.from_rows([["3/5", "2/5"], ["0", "1"]])
        fm = fundamental_matrix(m, [0])
        assert fm.values[0][0] == F(5, 2)

    def test_rejects_non_open_set(self, symmetric_two_state):
        with pytest.raises(NotOpenError):
            fundamental_matrix(symmetric_two_state, [0, 1])

    def test_visit_count_accessor(self, fig3_4_3):
        fm = fundamental_matrix(fig3_4_3, [0, 1])
        assert fm.visit_count(0, 1) == F(1, 3)
        assert fm.max_entry == F(1)


class TestStationaryBySolve:
    def test_symmetric(self, symmetric_two_state):
        assert stationary_by_solve(symmetric_two_state) == (F(1, 2), F(1, 2))

    def test_cycle_chain(self, fig2_345):
        pi = stationary_by_solve(fig2_345)
        assert pi == (F(20, 47), F(15, 47), F(12, 47))

    def test_single_state(self):
        assert stationary_by_solve(StochasticMatrix.from_rows([["1"]])) == (F(1),)

    def test_rejects_reducible(self, absorbing_two_state):
        with pytest.raises(NotIrreducibleError):
            stationary_by_solve(absorbing_two_state)


@given(stochastic_matrices(max_n=5))
@settings(max_examples=100, deadline=None)
def test_stationary_solve_is_invariant_and_normalized(matrix):
    from chainlcd.structure import is_irreducible

    if not is_irreducible(matrix):
        return
    pi = stationary_by_solve(matrix)
    n = matrix.n
    assert sum(pi) == 1
    assert all(x > 0 for x in pi)
    for j in range(n):
        assert sum((pi[i] * matrix.rows[i][j] for i in range(n)), start=F(0)) == pi[j]
