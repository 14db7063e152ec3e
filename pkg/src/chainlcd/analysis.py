"""Stationary distributions, absorption probabilities, gains, and biases.

Each quantity is computable by two independent routes that must agree
exactly:

* stationary distribution: tree-weight ratios vs. direct linear solve;
* absorption probabilities: forest-weight ratios vs. the fundamental
  matrix applied to the recurrent columns;
* visit counts: forest-weight ratios vs. entries of the fundamental matrix.

Gain and bias vectors are assembled from those primitives; the defining
equalities (the gain is harmonic, and P u = chi + u - r) hold exactly and
are re-checked by the verification harness.
"""

from __future__ import annotations

import bisect
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .core import StochasticMatrix
from .forests import (
    DEFAULT_ENUMERATION_BUDGET,
    EnumerationBudgetError,
    enumerate_forests,
    enumerate_forests_with_path,
    tree_weight_sum_det,
)
from .linalg import fundamental_matrix, solve, stationary_by_solve
from .structure import (
    ChainStructure,
    NotIrreducibleError,
    NotOpenError,
    decompose,
    is_irreducible,
    is_open,
)

__all__ = [
    "AbsorptionTable",
    "BiasVector",
    "GainVector",
    "StationaryDistribution",
    "absorption_by_fundamental",
    "absorption_forest_formula",
    "bias",
    "bias_residuals",
    "class_matrix",
    "gain",
    "hilbert_seminorm",
    "simulate_absorption",
    "stationary_tree_formula",
    "visits",
]

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class StationaryDistribution:
    """Stationary probabilities over a state set, with the producing route."""

    states: tuple[int, ...]
    probabilities: tuple[Fraction, ...]
    method: str

    def probability(self, state: int) -> Fraction:
        return self.probabilities[self.states.index(state)]

    def as_mapping(self) -> dict[int, Fraction]:
        return dict(zip(self.states, self.probabilities))


@dataclass(frozen=True)
class AbsorptionTable:
    """Probabilities of ending up in each recurrent class, per start state.

    ``values[state][k]`` is the probability of reaching ``classes[k]``.
    Every row sums to exactly 1; recurrent rows are 0/1 indicators.
    """

    classes: tuple[tuple[int, ...], ...]
    values: tuple[tuple[Fraction, ...], ...]
    method: str

    def value(self, state: int, class_index: int) -> Fraction:
        return self.values[state][class_index]

    def all_values(self) -> list[Fraction]:
        return [x for row in self.values for x in row]


@dataclass(frozen=True)
class GainVector:
    """Per-class long-run average rewards and the per-state gain vector."""

    class_gains: tuple[Fraction, ...]
    chi: tuple[Fraction, ...]
    constant: bool


@dataclass(frozen=True)
class BiasVector:
    """A bias vector together with the gain it certifies.

    ``normalization`` is ``"anchored"`` (one designated state per recurrent
    class has bias zero) or ``"weighted"`` (each class's bias averages to
    zero under its stationary distribution).  ``anchors`` records the chosen
    anchor states for the anchored kind.
    """

    chi: tuple[Fraction, ...]
    u: tuple[Fraction, ...]
    normalization: str
    anchors: tuple[int, ...] | None = None


def class_matrix(matrix: StochasticMatrix, states: Sequence[int]) -> StochasticMatrix:
    """Restriction of the chain to a closed recurrent class.

    Valid only for closed classes; the constructor re-checks the row sums,
    so calling this with a leaky set fails loudly.
    """
    cls = sorted(states)
    return StochasticMatrix(
        tuple(tuple(matrix.rows[a][b] for b in cls) for a in cls)
    )


def _restrict(
    matrix: StochasticMatrix, row_states: Sequence[int], col_states: Sequence[int]
) -> list[list[Fraction]]:
    return [[matrix.rows[a][b] for b in col_states] for a in row_states]


def stationary_tree_formula(
    matrix: StochasticMatrix,
    budget: int = DEFAULT_ENUMERATION_BUDGET,
    det_fallback: bool = True,
) -> StationaryDistribution:
    """Stationary distribution of an irreducible chain by tree weights.

    Each state's probability is its rooted-tree weight divided by the total
    over all roots.  Tree weights come from exhaustive enumeration when the
    candidate counts fit the budget, otherwise from Laplacian-minor
    determinants (or an error when ``det_fallback`` is off).
    """
    if not is_irreducible(matrix):
        raise NotIrreducibleError("the tree formula requires an irreducible chain")
    n = matrix.n
    out_degrees = [
        sum(1 for w in matrix.successors(v) if w != v) for v in range(n)
    ]
    worst = 0
    for root in range(n):
        count = math.prod(out_degrees[v] for v in range(n) if v != root)
        worst = max(worst, count)
    if worst <= budget:
        weights = [
            enumerate_forests(matrix, [root], budget=budget).total_weight
            for root in range(n)
        ]
        method = "enumeration"
    elif det_fallback:
        weights = [tree_weight_sum_det(matrix, root) for root in range(n)]
        method = "determinant"
    else:
        raise EnumerationBudgetError(worst, budget)
    total = sum(weights, start=ZERO)
    return StationaryDistribution(
        states=tuple(range(n)),
        probabilities=tuple(w / total for w in weights),
        method=method,
    )


def _trivial_absorption(
    structure: ChainStructure, n: int, method: str
) -> AbsorptionTable:
    """Table for chains where no genuine computation is needed."""
    classes = structure.recurrent_classes
    rows = []
    for v in range(n):
        idx = structure.class_index_of(v)
        if idx is None:
            # Only valid when there is a single class: certain absorption.
            rows.append(tuple(ONE for _ in classes))
        else:
            rows.append(tuple(ONE if k == idx else ZERO for k in range(len(classes))))
    return AbsorptionTable(classes=classes, values=tuple(rows), method=method)


def absorption_by_fundamental(
    matrix: StochasticMatrix, structure: ChainStructure | None = None
) -> AbsorptionTable:
    """Absorption probabilities via the fundamental matrix of the transient set."""
    structure = structure or decompose(matrix)
    classes = structure.recurrent_classes
    transient = structure.transient_states
    if not transient:
        return _trivial_absorption(structure, matrix.n, method="closed-form")
    recurrent = structure.recurrent_states
    visit_counts = fundamental_matrix(matrix, transient).values
    into_recurrent = _restrict(matrix, transient, recurrent)
    class_of = {v: structure.class_index_of(v) for v in recurrent}

    rows: list[tuple[Fraction, ...]] = []
    transient_pos = {v: i for i, v in enumerate(transient)}
    for v in range(matrix.n):
        idx = structure.class_index_of(v)
        if idx is not None:
            rows.append(tuple(ONE if k == idx else ZERO for k in range(len(classes))))
            continue
        acc = [ZERO] * len(classes)
        vi = transient_pos[v]
        for wi, w in enumerate(transient):
            count = visit_counts[vi][wi]
            if count == ZERO:
                continue
            for si, s in enumerate(recurrent):
                step = into_recurrent[wi][si]
                if step != ZERO:
                    acc[class_of[s]] += count * step
        rows.append(tuple(acc))
    return AbsorptionTable(classes=classes, values=tuple(rows), method="fundamental")


def absorption_forest_formula(
    matrix: StochasticMatrix,
    structure: ChainStructure | None = None,
    budget: int = DEFAULT_ENUMERATION_BUDGET,
    fundamental_fallback: bool = True,
) -> AbsorptionTable:
    """Absorption probabilities via forest-weight ratios.

    For a transient start state, the probability of a class is the weight of
    forests rooted at the recurrent set whose path from the start leads into
    that class, divided by the total weight of all such forests.  A start
    with a single recurrent state is trivially absorbed with probability 1.
    When enumeration would exceed the budget the fundamental-matrix route is
    used instead (flagged in ``method``), unless disabled.
    """
    structure = structure or decompose(matrix)
    classes = structure.recurrent_classes
    transient = structure.transient_states
    if structure.recurrent_state_count == 1 or not transient:
        return _trivial_absorption(structure, matrix.n, method="closed-form")

    recurrent = structure.recurrent_states
    try:
        family = enumerate_forests(matrix, recurrent, budget=budget)
    except EnumerationBudgetError:
        if not fundamental_fallback:
            raise
        table = absorption_by_fundamental(matrix, structure)
        return AbsorptionTable(
            classes=table.classes, values=table.values, method="fundamental-fallback"
        )

    class_of = {v: structure.class_index_of(v) for v in recurrent}
    numerators = {v: [ZERO] * len(classes) for v in transient}
    for forest in family.forests:
        parents = forest.parent_map()
        for v in transient:
            w = v
            while w in parents:
                w = parents[w]
            numerators[v][class_of[w]] += forest.weight

    rows: list[tuple[Fraction, ...]] = []
    for v in range(matrix.n):
        idx = structure.class_index_of(v)
        if idx is not None:
            rows.append(tuple(ONE if k == idx else ZERO for k in range(len(classes))))
        else:
            rows.append(tuple(x / family.total_weight for x in numerators[v]))
    return AbsorptionTable(classes=classes, values=tuple(rows), method="enumeration")


def visits(
    matrix: StochasticMatrix,
    open_states: Iterable[int],
    source: int,
    target: int,
    budget: int = DEFAULT_ENUMERATION_BUDGET,
) -> Fraction:
    """Expected visits to ``target`` before leaving the open set, started at
    ``source``, via the forest-weight ratio.

    The denominator collects forests rooted at the complement; the numerator
    additionally roots the target and keeps forests routing the source to it
    (all of them when source == target).
    """
    inside = tuple(sorted(set(open_states)))
    if not is_open(matrix, inside):
        raise NotOpenError(f"state set {list(inside)} is not open")
    for v in (source, target):
        if v not in inside:
            raise ValueError(f"state {v} is outside the open set {list(inside)}")
    complement = [v for v in range(matrix.n) if v not in set(inside)]
    denominator = enumerate_forests(matrix, complement, budget=budget).total_weight
    numerator = enumerate_forests_with_path(
        matrix, complement + [target], source, target, budget=budget
    ).total_weight
    return numerator / denominator


def _class_stationaries(
    matrix: StochasticMatrix, structure: ChainStructure
) -> list[dict[int, Fraction]]:
    """Stationary distribution of each recurrent class, keyed by state."""
    result = []
    for cls in structure.recurrent_classes:
        sub = class_matrix(matrix, cls)
        pi = stationary_by_solve(sub)
        result.append(dict(zip(cls, pi)))
    return result


def _validated_rewards(matrix: StochasticMatrix, rewards: Sequence[int]) -> list[int]:
    if len(rewards) != matrix.n:
        raise ValueError(
            f"reward vector has {len(rewards)} entries, expected {matrix.n}"
        )
    return [int(x) for x in rewards]


def gain(
    matrix: StochasticMatrix,
    rewards: Sequence[int],
    structure: ChainStructure | None = None,
) -> GainVector:
    """Long-run average reward per start state.

    Combines per-class stationary averages with absorption probabilities;
    flags whether the result is constant across states (the ergodic case).
    """
    r = _validated_rewards(matrix, rewards)
    structure = structure or decompose(matrix)
    stationaries = _class_stationaries(matrix, structure)
    class_gains = tuple(
        sum((Fraction(r[v]) * pi_v for v, pi_v in pi.items()), start=ZERO)
        for pi in stationaries
    )
    table = absorption_by_fundamental(matrix, structure)
    chi = tuple(
        sum(
            (table.values[v][k] * class_gains[k] for k in range(len(class_gains))),
            start=ZERO,
        )
        for v in range(matrix.n)
    )
    return GainVector(
        class_gains=class_gains, chi=chi, constant=len(set(chi)) <= 1
    )


def _anchored_class_bias(
    matrix: StochasticMatrix,
    cls: Sequence[int],
    anchor: int,
    eta: Fraction,
    r: Sequence[int],
) -> dict[int, Fraction]:
    """Bias values on one recurrent class with the anchor pinned to zero.

    Deleting the anchor row and column of I - P leaves an invertible system
    (the remainder of the class is an open set of the class chain), and the
    full class equation then holds automatically because the right-hand side
    is orthogonal to the stationary distribution.
    """
    others = [v for v in cls if v != anchor]
    values = {anchor: ZERO}
    if others:
        a_rows = [
            [
                (ONE if a == b else ZERO) - matrix.rows[a][b]
                for b in others
            ]
            for a in others
        ]
        rhs = [Fraction(r[a]) - eta for a in others]
        for v, x in zip(others, solve(a_rows, rhs)):
            values[v] = x
    return values


def bias(
    matrix: StochasticMatrix,
    rewards: Sequence[int],
    normalization: str = "anchored",
    anchors: Sequence[int] | None = None,
    structure: ChainStructure | None = None,
) -> BiasVector:
    """Solve for a bias vector with the requested normalization.

    ``anchored`` pins one state per recurrent class to zero (the smallest
    index by default; ``anchors`` overrides, one state per class in class
    order).  ``weighted`` makes each class's bias average to zero under the
    class's stationary distribution.  Transient entries are lifted through
    the fundamental matrix of the transient set afterward.
    """
    if normalization not in ("anchored", "weighted"):
        raise ValueError(f"unknown normalization {normalization!r}")
    r = _validated_rewards(matrix, rewards)
    structure = structure or decompose(matrix)
    classes = structure.recurrent_classes

    if anchors is None:
        anchor_list = [cls[0] for cls in classes]
    else:
        anchor_list = list(anchors)
        if len(anchor_list) != len(classes):
            raise ValueError(
                f"expected {len(classes)} anchors, got {len(anchor_list)}"
            )
        for anchor, cls in zip(anchor_list, classes):
            if anchor not in cls:
                raise ValueError(f"anchor {anchor} is not in class {list(cls)}")

    stationaries = _class_stationaries(matrix, structure)
    class_gains = [
        sum((Fraction(r[v]) * pi_v for v, pi_v in pi.items()), start=ZERO)
        for pi in stationaries
    ]

    u_values: dict[int, Fraction] = {}
    for cls, anchor, eta, pi in zip(classes, anchor_list, class_gains, stationaries):
        class_u = _anchored_class_bias(matrix, cls, anchor, eta, r)
        if normalization == "weighted":
            shift = sum((pi[v] * class_u[v] for v in cls), start=ZERO)
            class_u = {v: x - shift for v, x in class_u.items()}
        u_values.update(class_u)

    table = absorption_by_fundamental(matrix, structure)
    chi = tuple(
        sum(
            (table.values[v][k] * class_gains[k] for k in range(len(class_gains))),
            start=ZERO,
        )
        for v in range(matrix.n)
    )

    transient = structure.transient_states
    if transient:
        recurrent = structure.recurrent_states
        a_rows = [
            [
                (ONE if a == b else ZERO) - matrix.rows[a][b]
                for b in transient
            ]
            for a in transient
        ]
        rhs = []
        for v in transient:
            into_classes = sum(
                (matrix.rows[v][s] * u_values[s] for s in recurrent), start=ZERO
            )
            rhs.append(Fraction(r[v]) - chi[v] + into_classes)
        for v, x in zip(transient, solve(a_rows, rhs)):
            u_values[v] = x

    u = tuple(u_values[v] for v in range(matrix.n))
    return BiasVector(
        chi=chi,
        u=u,
        normalization=normalization,
        anchors=tuple(anchor_list) if normalization == "anchored" else None,
    )


def bias_residuals(
    matrix: StochasticMatrix, rewards: Sequence[int], result: BiasVector
) -> tuple[tuple[Fraction, ...], tuple[Fraction, ...]]:
    """Residuals of the defining equations; both are all-zero for a valid bias.

    Returns (P chi - chi, P u - chi - u + r).
    """
    r = _validated_rewards(matrix, rewards)
    n = matrix.n
    p_chi = [
        sum((matrix.rows[i][j] * result.chi[j] for j in range(n)), start=ZERO)
        for i in range(n)
    ]
    p_u = [
        sum((matrix.rows[i][j] * result.u[j] for j in range(n)), start=ZERO)
        for i in range(n)
    ]
    first = tuple(p_chi[i] - result.chi[i] for i in range(n))
    second = tuple(
        p_u[i] - result.chi[i] - result.u[i] + Fraction(r[i]) for i in range(n)
    )
    return first, second


def hilbert_seminorm(values: Iterable[Fraction]) -> Fraction:
    """Spread of a vector: max entry minus min entry."""
    items = list(values)
    return max(items) - min(items)


def simulate_absorption(
    matrix: StochasticMatrix,
    structure: ChainStructure,
    start: int,
    trials: int,
    seed: int = 0,
) -> tuple[int, ...]:
    """Monte Carlo absorption counts per recurrent class (fixed seed).

    Runs ``trials`` trajectories from ``start`` until a recurrent state is
    hit and tallies the class reached.  Float thresholds drive the sampling;
    the verdicts that consume these counts are statistical, never exact.
    """
    rng = random.Random(seed)
    n = matrix.n
    thresholds: list[list[float]] = []
    targets: list[list[int]] = []
    for v in range(n):
        succs = matrix.successors(v)
        acc = 0.0
        cuts = []
        for w in succs:
            acc += float(matrix.rows[v][w])
            cuts.append(acc)
        cuts[-1] = 1.0
        thresholds.append(cuts)
        targets.append(list(succs))

    class_of: dict[int, int] = {}
    for k, cls in enumerate(structure.recurrent_classes):
        for v in cls:
            class_of[v] = k

    counts = [0] * structure.class_count
    for _ in range(trials):
        v = start
        while v not in class_of:
            u = rng.random()
            v = targets[v][bisect.bisect_right(thresholds[v], u)]
        counts[class_of[v]] += 1
    return tuple(counts)
