"""Rooted spanning forests of the transition digraph and their weights.

A rooted forest is an edge subset in which every non-root vertex has exactly
one outgoing edge, roots have none, and no directed cycle exists (a self-loop
counts as a cycle, so loops never appear).  Edges point toward the roots,
matching the direction of chain transitions.  The weight of a forest is the
product of its edge probabilities.

Total weights are computed two independent ways:

* exhaustive enumeration over all assignments of one non-loop out-edge per
  non-root vertex, rejecting assignments that close a cycle;
* minors of the weighted out-degree Laplacian (directed matrix-tree
  theorem), evaluated by exact determinant.

The two must agree exactly, which the test-suite checks instance by
instance.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .core import ChainError, StochasticMatrix
from .linalg import det

__all__ = [
    "DEFAULT_ENUMERATION_BUDGET",
    "EnumerationBudgetError",
    "ForestFamily",
    "RootedForest",
    "enumerate_forests",
    "enumerate_forests_with_path",
    "forest_weight_sum_det",
    "tree_weight_sum_det",
]

DEFAULT_ENUMERATION_BUDGET = 10**7


class EnumerationBudgetError(ChainError):
    """Enumeration would visit more candidates than the configured budget."""

    def __init__(self, candidates: int, budget: int):
        super().__init__(
            f"forest enumeration needs {candidates} candidates, budget is {budget}"
        )
        self.candidates = candidates
        self.budget = budget


@dataclass(frozen=True)
class RootedForest:
    """One rooted forest: sorted (vertex, parent) edges plus its weight."""

    parent_edges: tuple[tuple[int, int], ...]
    roots: tuple[int, ...]
    weight: Fraction

    def parent_map(self) -> dict[int, int]:
        return dict(self.parent_edges)

    def root_of(self, vertex: int) -> int:
        """Follow the unique outgoing path from ``vertex`` to its root."""
        parents = self.parent_map()
        v = vertex
        while v in parents:
            v = parents[v]
        return v

    def contains_path(self, source: int, target: int) -> bool:
        """True iff the forest has a directed path source -> target."""
        parents = self.parent_map()
        v = source
        while True:
            if v == target:
                return True
            if v not in parents:
                return False
            v = parents[v]


@dataclass(frozen=True)
class ForestFamily:
    """All rooted forests for a fixed root set, with their total weight."""

    roots: tuple[int, ...]
    forests: tuple[RootedForest, ...]
    total_weight: Fraction


def _validated_roots(matrix: StochasticMatrix, roots: Iterable[int]) -> tuple[int, ...]:
    root_set = sorted(set(roots))
    if not root_set:
        raise ValueError("root set must be non-empty")
    if root_set[0] < 0 or root_set[-1] >= matrix.n:
        raise ValueError(f"roots {root_set} not within 0..{matrix.n - 1}")
    return tuple(root_set)


def _candidates(
    matrix: StochasticMatrix, roots: Sequence[int]
) -> tuple[list[int], list[tuple[int, ...]]]:
    """Non-root vertices and, per vertex, its non-loop out-edge targets."""
    root_set = set(roots)
    vertices = [v for v in range(matrix.n) if v not in root_set]
    choices = [
        tuple(w for w in matrix.successors(v) if w != v) for v in vertices
    ]
    return vertices, choices


def _is_acyclic(parent: dict[int, int], scratch: list[int]) -> bool:
    """Cycle check for a functional graph given as a parent map.

    ``scratch`` must be an all-zero array of length n; it is used for walk
    marks (1 on the current walk, 2 known safe) and restored to zero before
    returning, so the same array can be reused across candidates.
    """
    acyclic = True
    for start in parent:
        if scratch[start]:
            continue
        v = start
        walk = []
        while v in parent and scratch[v] == 0:
            scratch[v] = 1
            walk.append(v)
            v = parent[v]
        if scratch[v] == 1:
            acyclic = False
            break
        for u in walk:
            scratch[u] = 2
    for u in parent:
        scratch[u] = 0
    return acyclic


def enumerate_forests(
    matrix: StochasticMatrix,
    roots: Iterable[int],
    budget: int = DEFAULT_ENUMERATION_BUDGET,
) -> ForestFamily:
    """Enumerate every rooted forest whose root set is exactly ``roots``.

    Iterates over all ways to give each non-root vertex one of its non-loop
    out-edges and keeps the acyclic assignments.  Forests come out in
    lexicographic order of their parent maps.  Raises
    :class:`EnumerationBudgetError` when the candidate count (the product of
    out-degrees) exceeds ``budget``.
    """
    root_set = _validated_roots(matrix, roots)
    vertices, choices = _candidates(matrix, root_set)

    candidate_count = math.prod(len(c) for c in choices)
    if candidate_count > budget:
        raise EnumerationBudgetError(candidate_count, budget)

    scratch = [0] * matrix.n
    forests: list[RootedForest] = []
    total = Fraction(0)
    for assignment in itertools.product(*choices):
        parent = dict(zip(vertices, assignment))
        if not _is_acyclic(parent, scratch):
            continue
        weight = Fraction(1)
        for v, w in parent.items():
            weight *= matrix.rows[v][w]
        forest = RootedForest(
            parent_edges=tuple(sorted(parent.items())),
            roots=root_set,
            weight=weight,
        )
        forests.append(forest)
        total += weight
    return ForestFamily(roots=root_set, forests=tuple(forests), total_weight=total)


def enumerate_forests_with_path(
    matrix: StochasticMatrix,
    roots: Iterable[int],
    source: int,
    target: int,
    budget: int = DEFAULT_ENUMERATION_BUDGET,
) -> ForestFamily:
    """Forests with root set ``roots`` that contain a path source -> target.

    When source == target this is the whole family (the empty path counts).
    """
    for v in (source, target):
        if not 0 <= v < matrix.n:
            raise ValueError(f"vertex {v} not within 0..{matrix.n - 1}")
    family = enumerate_forests(matrix, roots, budget=budget)
    if source == target:
        return family
    kept = tuple(f for f in family.forests if f.contains_path(source, target))
    total = sum((f.weight for f in kept), start=Fraction(0))
    return ForestFamily(roots=family.roots, forests=kept, total_weight=total)


def _laplacian_minor(
    matrix: StochasticMatrix, deleted: Sequence[int]
) -> list[list[Fraction]]:
    """Weighted out-degree Laplacian with the given rows/columns removed.

    L has the off-diagonal row sums on the diagonal and the negated
    off-diagonal transition probabilities elsewhere; self-loop weights never
    enter (a loop cannot occur in a forest).
    """
    removed = set(deleted)
    kept = [v for v in range(matrix.n) if v not in removed]
    rows: list[list[Fraction]] = []
    for v in kept:
        off_diagonal_sum = sum(
            (matrix.rows[v][w] for w in range(matrix.n) if w != v),
            start=Fraction(0),
        )
        rows.append(
            [
                off_diagonal_sum if v == w else -matrix.rows[v][w]
                for w in kept
            ]
        )
    return rows


def tree_weight_sum_det(matrix: StochasticMatrix, root: int) -> Fraction:
    """Total weight of all rooted trees with the given root, by determinant."""
    if not 0 <= root < matrix.n:
        raise ValueError(f"root {root} not within 0..{matrix.n - 1}")
    return det(_laplacian_minor(matrix, [root]))


def forest_weight_sum_det(
    matrix: StochasticMatrix, roots: Iterable[int]
) -> Fraction:
    """Total weight of all forests rooted exactly at ``roots``, by determinant."""
    root_set = _validated_roots(matrix, roots)
    return det(_laplacian_minor(matrix, root_set))
