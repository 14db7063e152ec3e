"""Recurrent classes, transient states, and open sets of a chain.

A recurrent class is a strongly connected component of the transition
digraph with no edge leaving it; every other state is transient.  The
classification is purely structural (it looks only at which transitions
have positive probability), never statistical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .core import ChainError, StochasticMatrix, denominator_stats

__all__ = [
    "ChainStructure",
    "NotIrreducibleError",
    "NotOpenError",
    "decompose",
    "is_irreducible",
    "is_open",
    "strongly_connected_components",
]


class NotIrreducibleError(ChainError):
    """An operation that requires an irreducible chain got a reducible one."""


class NotOpenError(ChainError):
    """An operation that requires an open state set got a non-open one."""


@dataclass(frozen=True)
class ChainStructure:
    """Partition of the states into recurrent classes and transient states.

    ``recurrent_classes`` are sorted by their smallest member so output is
    deterministic.  ``transient_row_lcd_product`` is the product of row lcds
    over transient states (1 when there are none), and
    ``nondeterministic_transient_rows`` counts transient rows with at least
    two nonzero entries.
    """

    recurrent_classes: tuple[tuple[int, ...], ...]
    transient_states: tuple[int, ...]
    transient_row_lcd_product: int
    nondeterministic_transient_rows: int

    @property
    def class_count(self) -> int:
        return len(self.recurrent_classes)

    @property
    def recurrent_states(self) -> tuple[int, ...]:
        return tuple(sorted(v for cls in self.recurrent_classes for v in cls))

    @property
    def recurrent_state_count(self) -> int:
        return sum(len(cls) for cls in self.recurrent_classes)

    def class_index_of(self, state: int) -> int | None:
        """Index of the recurrent class containing ``state``, else None."""
        for idx, cls in enumerate(self.recurrent_classes):
            if state in cls:
                return idx
        return None


def strongly_connected_components(
    successors: Sequence[Sequence[int]],
) -> list[list[int]]:
    """Tarjan's algorithm, iterative to stay safe on long chains.

    Returns components as sorted vertex lists, in reverse topological
    order of the condensation (as Tarjan emits them).
    """
    n = len(successors)
    index_of = [-1] * n
    lowlink = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    components: list[list[int]] = []
    counter = 0

    for root in range(n):
        if index_of[root] != -1:
            continue
        work: list[tuple[int, int]] = [(root, 0)]
        while work:
            v, edge_pos = work.pop()
            if edge_pos == 0:
                index_of[v] = lowlink[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            advanced = False
            for pos in range(edge_pos, len(successors[v])):
                w = successors[v][pos]
                if index_of[w] == -1:
                    work.append((v, pos + 1))
                    work.append((w, 0))
                    advanced = True
                    break
                if on_stack[w]:
                    lowlink[v] = min(lowlink[v], index_of[w])
            if advanced:
                continue
            if lowlink[v] == index_of[v]:
                component = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    component.append(w)
                    if w == v:
                        break
                components.append(sorted(component))
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[v])
    return components


def decompose(matrix: StochasticMatrix) -> ChainStructure:
    """Split the chain into closed recurrent classes and transient states."""
    successors = [matrix.successors(i) for i in range(matrix.n)]
    components = strongly_connected_components(successors)

    recurrent: list[tuple[int, ...]] = []
    transient: list[int] = []
    for component in components:
        members = set(component)
        closed = all(w in members for v in component for w in successors[v])
        if closed:
            recurrent.append(tuple(component))
        else:
            transient.extend(component)
    recurrent.sort(key=lambda cls: cls[0])
    transient.sort()

    stats = denominator_stats(matrix)
    lcd_product = math.prod(stats.row_lcds[i] for i in transient) if transient else 1
    nondet = sum(
        1
        for i in transient
        if sum(1 for x in matrix.rows[i] if x > 0) >= 2
    )
    return ChainStructure(
        recurrent_classes=tuple(recurrent),
        transient_states=tuple(transient),
        transient_row_lcd_product=lcd_product,
        nondeterministic_transient_rows=nondet,
    )


def is_open(matrix: StochasticMatrix, states: Iterable[int]) -> bool:
    """True iff every state in the set has a directed path leaving the set."""
    inside = set(states)
    if not inside:
        raise ValueError("openness is undefined for the empty set")
    if not inside.issubset(range(matrix.n)):
        raise ValueError(f"state set {sorted(inside)} not within 0..{matrix.n - 1}")

    # Reverse reachability from the escape boundary, restricted to the set.
    predecessors: dict[int, list[int]] = {v: [] for v in inside}
    escaping: set[int] = set()
    for v in inside:
        for w in matrix.successors(v):
            if w in inside:
                predecessors[w].append(v)
            else:
                escaping.add(v)
    frontier = list(escaping)
    while frontier:
        w = frontier.pop()
        for v in predecessors[w]:
            if v not in escaping:
                escaping.add(v)
                frontier.append(v)
    return escaping == inside


def is_irreducible(matrix: StochasticMatrix) -> bool:
    """True iff the transition digraph is strongly connected."""
    successors = [matrix.successors(i) for i in range(matrix.n)]
    return len(strongly_connected_components(successors)) == 1
