"""End-to-end instance evaluation.

``evaluate_instance`` computes every analysis quantity along both of its
routes, re-checks the structural lemmas, and collects the bound verdicts.
The result feeds three consumers: the ``verify`` command's summary, the
``analyze`` command's report, and the acceptance test-suite.

Every check is either a named boolean property (dual-path equalities,
lemma integrality, residuals) or a :class:`~chainlcd.bounds.BoundCheck`
verdict; anything that fails lands in ``failures`` with a readable message.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

from .analysis import (
    AbsorptionTable,
    BiasVector,
    GainVector,
    StationaryDistribution,
    absorption_by_fundamental,
    absorption_forest_formula,
    bias,
    bias_residuals,
    class_matrix,
    gain,
    hilbert_seminorm,
    stationary_tree_formula,
)
from .bounds import (
    BoundCheck,
    check_absorption_bound,
    check_bias_bounds,
    check_gain_bounds,
    check_stationary_bound,
    check_visit_cap,
    hadamard_comparison,
)
from .core import (
    DenominatorStats,
    StochasticMatrix,
    denominator_stats,
    format_rational,
    lcd_of_vector,
    parse_instance,
    serialize_instance,
)
from .forests import (
    DEFAULT_ENUMERATION_BUDGET,
    EnumerationBudgetError,
    enumerate_forests,
    forest_weight_sum_det,
    tree_weight_sum_det,
)
from .generators import (
    fig2_prime_cycle,
    fig2_variant,
    fig3_absorption,
    first_primes,
    random_chain,
    random_multichain,
)
from .linalg import FundamentalMatrix, fundamental_matrix, stationary_by_solve
from .structure import ChainStructure, decompose, is_irreducible, is_open

__all__ = [
    "ClassStationaryPair",
    "InstanceEvaluation",
    "SuiteInstance",
    "build_report",
    "evaluate_instance",
    "extremal_suite",
    "random_suite",
    "summarize",
]

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class SuiteInstance:
    label: str
    matrix: StochasticMatrix
    rewards: tuple[int, ...] | None = None


@dataclass(frozen=True)
class ClassStationaryPair:
    """Stationary distribution of one recurrent class along both routes."""

    states: tuple[int, ...]
    tree: StationaryDistribution
    solve: StationaryDistribution

    @property
    def agree(self) -> bool:
        return self.tree.probabilities == self.solve.probabilities


@dataclass
class InstanceEvaluation:
    """Everything computed and checked for one instance."""

    label: str
    matrix: StochasticMatrix
    rewards: tuple[int, ...] | None
    stats: DenominatorStats
    structure: ChainStructure
    irreducible: bool
    class_stationaries: list[ClassStationaryPair] = field(default_factory=list)
    absorption_forest: AbsorptionTable | None = None
    absorption_fundamental: AbsorptionTable | None = None
    visits_open_set: tuple[int, ...] | None = None
    visits_forest: dict[tuple[int, int], Fraction] = field(default_factory=dict)
    visits_fundamental: FundamentalMatrix | None = None
    gain_result: GainVector | None = None
    bias_anchored: BiasVector | None = None
    bias_weighted: BiasVector | None = None
    checks: list[BoundCheck] = field(default_factory=list)
    properties: dict[str, bool] = field(default_factory=dict)
    failures: list[str] = field(default_factory=list)
    max_lcd: int = 1

    @property
    def all_pass(self) -> bool:
        return not self.failures

    def checks_named(self, name: str) -> list[BoundCheck]:
        return [c for c in self.checks if c.name == name]

    def _record(self, name: str, outcome: bool, detail: str = "") -> None:
        self.properties[name] = outcome
        if not outcome:
            suffix = f": {detail}" if detail else ""
            self.failures.append(f"{self.label}: property {name} failed{suffix}")

    def _add_checks(self, checks: Sequence[BoundCheck]) -> None:
        for check in checks:
            self.checks.append(check)
            if not check.passed:
                self.failures.append(
                    f"{self.label}: bound {check.name} violated:"
                    f" observed {check.observed} > bound {check.bound}"
                )


def _is_integral(value: Fraction) -> bool:
    return value.denominator == 1


def _forest_is_valid(forest, matrix: StochasticMatrix) -> bool:
    """Independent re-validation of an enumerated forest."""
    parents = forest.parent_map()
    declared_roots = set(forest.roots)
    if declared_roots & set(parents):
        return False
    if set(range(matrix.n)) - set(parents) != declared_roots:
        return False
    weight = ONE
    for v, w in parents.items():
        if v == w or matrix.rows[v][w] == ZERO:
            return False
        weight *= matrix.rows[v][w]
    if weight != forest.weight:
        return False
    # Acyclicity: every vertex must reach a declared root.
    for v in parents:
        seen = set()
        w = v
        while w in parents:
            if w in seen:
                return False
            seen.add(w)
            w = parents[w]
    return True


def _check_roundtrip(ev: InstanceEvaluation) -> None:
    text = serialize_instance(ev.matrix, ev.rewards)
    parsed = parse_instance(text)
    same = parsed.matrix == ev.matrix and parsed.rewards == ev.rewards
    ev._record("round_trip", same)


def _check_stats(ev: InstanceEvaluation) -> None:
    stats = ev.stats
    n = stats.n
    m, d, k = stats.global_lcd, stats.row_lcd_product, stats.nondeterministic_rows
    # Deterministic rows have lcd 1, so m <= d <= m^k holds even at k = 0.
    ev._record("stats_product_bounds", m <= d <= m**k)
    tree_bound = min(n * d, n * m ** max(n - 1, 0))
    ev._record(
        "nondet_power_dominates",
        tree_bound <= n * m ** min(k, max(n - 1, 0)),
    )


def _check_structure(ev: InstanceEvaluation) -> None:
    structure = ev.structure
    matrix = ev.matrix
    if structure.transient_states:
        ev._record("transient_set_open", is_open(matrix, structure.transient_states))
    closed = all(
        not is_open(matrix, cls) for cls in structure.recurrent_classes
    )
    ev._record("recurrent_classes_closed", closed)
    ev._record(
        "irreducible_consistent",
        ev.irreducible
        == (structure.class_count == 1 and not structure.transient_states),
    )


def _check_stationary(ev: InstanceEvaluation, budget: int) -> None:
    matrix = ev.matrix
    all_agree = True
    all_valid = True
    for k, cls in enumerate(ev.structure.recurrent_classes):
        sub = class_matrix(matrix, cls)
        local_tree = stationary_tree_formula(sub, budget=budget)
        # Relabel from submatrix positions back to the original states.
        tree = StationaryDistribution(
            states=cls,
            probabilities=local_tree.probabilities,
            method=local_tree.method,
        )
        solved = StationaryDistribution(
            states=cls, probabilities=stationary_by_solve(sub), method="solve"
        )
        pair = ClassStationaryPair(states=cls, tree=tree, solve=solved)
        ev.class_stationaries.append(pair)
        all_agree = all_agree and pair.agree

        pi = solved.probabilities
        size = len(cls)
        balanced = all(
            sum((pi[a] * sub.rows[a][b] for a in range(size)), start=ZERO) == pi[b]
            for b in range(size)
        )
        all_valid = all_valid and balanced and sum(pi) == ONE and all(x > ZERO for x in pi)

        sub_stats = denominator_stats(sub)
        label = f"class C{k + 1}"
        ev._add_checks(
            [
                replace(c, note=label)
                for c in check_stationary_bound(pi, sub_stats)
            ]
        )
        ev.max_lcd = max(ev.max_lcd, lcd_of_vector(pi))
    ev._record("stationary_dual", all_agree)
    ev._record("stationary_valid", all_valid)


def _check_absorption(ev: InstanceEvaluation, budget: int) -> None:
    matrix = ev.matrix
    structure = ev.structure
    forest_table = absorption_forest_formula(matrix, structure, budget=budget)
    fundamental_table = absorption_by_fundamental(matrix, structure)
    ev.absorption_forest = forest_table
    ev.absorption_fundamental = fundamental_table
    if forest_table.method != "fundamental-fallback":
        ev._record(
            "absorption_dual", forest_table.values == fundamental_table.values
        )

    rows_ok = True
    for v in range(matrix.n):
        row = fundamental_table.values[v]
        if sum(row, start=ZERO) != ONE:
            rows_ok = False
        idx = structure.class_index_of(v)
        if idx is not None and any(
            x != (ONE if k == idx else ZERO) for k, x in enumerate(row)
        ):
            rows_ok = False
    ev._record("absorption_rows_valid", rows_ok)

    ev._add_checks(check_absorption_bound(fundamental_table, ev.stats, structure))
    ev.max_lcd = max(ev.max_lcd, lcd_of_vector(fundamental_table.all_values()))


def _choose_open_set(ev: InstanceEvaluation) -> tuple[int, ...] | None:
    if ev.structure.transient_states:
        return ev.structure.transient_states
    for cls in ev.structure.recurrent_classes:
        if len(cls) >= 2:
            return tuple(v for v in cls if v != max(cls))
    return None


def _check_visits(ev: InstanceEvaluation, budget: int) -> None:
    inside = _choose_open_set(ev)
    if inside is None:
        return
    matrix = ev.matrix
    ev.visits_open_set = inside
    fm = fundamental_matrix(matrix, inside)
    ev.visits_fundamental = fm
    ev._add_checks([check_visit_cap(fm, ev.stats)])

    try:
        complement = [v for v in range(matrix.n) if v not in set(inside)]
        denominator = enumerate_forests(matrix, complement, budget=budget).total_weight
        ratios: dict[tuple[int, int], Fraction] = {}
        for w in inside:
            family = enumerate_forests(matrix, complement + [w], budget=budget)
            numerators = {v: ZERO for v in inside}
            numerators[w] = family.total_weight
            for forest in family.forests:
                parents = forest.parent_map()
                for v in inside:
                    if v == w:
                        continue
                    u = v
                    while u in parents:
                        u = parents[u]
                    if u == w:
                        numerators[v] += forest.weight
            for v in inside:
                ratios[(v, w)] = numerators[v] / denominator
        ev.visits_forest = ratios
        agree = all(
            ratios[(v, w)] == fm.visit_count(v, w) for v in inside for w in inside
        )
        ev._record("visits_dual", agree)
    except EnumerationBudgetError:
        pass


def _check_forest_lemmas(ev: InstanceEvaluation, budget: int) -> None:
    matrix = ev.matrix
    stats = ev.stats
    n = matrix.n
    d = stats.row_lcd_product
    m_power = stats.global_lcd ** max(n - 1, 0)

    trees_integral = True
    totals_capped = True
    det_matches = True
    structures_valid = True
    try:
        for root in range(n):
            family = enumerate_forests(matrix, [root], budget=budget)
            for forest in family.forests:
                if not (
                    _is_integral(forest.weight * d)
                    and _is_integral(forest.weight * m_power)
                ):
                    trees_integral = False
                if not _forest_is_valid(forest, matrix):
                    structures_valid = False
            if family.total_weight > ONE:
                totals_capped = False
            if family.total_weight != tree_weight_sum_det(matrix, root):
                det_matches = False
    except EnumerationBudgetError:
        return
    ev._record("tree_weights_integral", trees_integral)
    ev._record("tree_totals_capped", totals_capped)
    ev._record("tree_det_matches", det_matches)
    ev._record("tree_structures_valid", structures_valid)

    recurrent = ev.structure.recurrent_states
    if len(recurrent) < 2:
        return
    d_t = ev.structure.transient_row_lcd_product
    m_power_forest = stats.global_lcd ** max(n - 2, 0)
    try:
        family = enumerate_forests(matrix, recurrent, budget=budget)
    except EnumerationBudgetError:
        return
    forests_integral = all(
        _is_integral(f.weight * d_t) and _is_integral(f.weight * m_power_forest)
        for f in family.forests
    )
    ev._record("forest_weights_integral", forests_integral)
    ev._record("forest_totals_capped", family.total_weight <= ONE)
    ev._record(
        "forest_det_matches",
        family.total_weight == forest_weight_sum_det(matrix, recurrent),
    )
    ev._record(
        "forest_structures_valid",
        all(_forest_is_valid(f, matrix) for f in family.forests),
    )


def _check_rewards(ev: InstanceEvaluation, budget: int) -> None:
    if ev.rewards is None:
        return
    matrix = ev.matrix
    structure = ev.structure
    rewards = ev.rewards

    gain_result = gain(matrix, rewards, structure)
    ev.gain_result = gain_result
    ev._add_checks(check_gain_bounds(gain_result, ev.stats, structure))
    ev.max_lcd = max(ev.max_lcd, lcd_of_vector(gain_result.chi))

    # Gain consistency along the independent absorption route.
    forest_table = ev.absorption_forest
    if forest_table is not None and forest_table.method == "enumeration":
        recombined = tuple(
            sum(
                (
                    forest_table.values[v][k] * gain_result.class_gains[k]
                    for k in range(structure.class_count)
                ),
                start=ZERO,
            )
            for v in range(matrix.n)
        )
        ev._record("gain_consistent_across_routes", recombined == gain_result.chi)

    anchored = bias(matrix, rewards, "anchored", structure=structure)
    weighted = bias(matrix, rewards, "weighted", structure=structure)
    ev.bias_anchored = anchored
    ev.bias_weighted = weighted

    for result, key in ((anchored, "anchored"), (weighted, "weighted")):
        chi_residual, bias_residual = bias_residuals(matrix, rewards, result)
        ev._record(
            f"bias_residuals_zero_{key}",
            all(x == ZERO for x in chi_residual)
            and all(x == ZERO for x in bias_residual),
        )
        ev._add_checks(check_bias_bounds(result, rewards, ev.stats))

    assert anchored.anchors is not None
    ev._record(
        "anchored_zero_per_class",
        all(anchored.u[a] == ZERO for a in anchored.anchors),
    )
    averages_zero = True
    difference_constant = True
    for pair, cls in zip(ev.class_stationaries, structure.recurrent_classes):
        pi = pair.solve.as_mapping()
        average = sum((pi[v] * weighted.u[v] for v in cls), start=ZERO)
        if average != ZERO:
            averages_zero = False
        offsets = {anchored.u[v] - weighted.u[v] for v in cls}
        if len(offsets) != 1:
            difference_constant = False
    ev._record("weighted_class_average_zero", averages_zero)
    ev._record("normalizations_differ_by_class_constant", difference_constant)


def evaluate_instance(
    matrix: StochasticMatrix,
    rewards: Sequence[int] | None = None,
    label: str = "instance",
    budget: int = DEFAULT_ENUMERATION_BUDGET,
    forest_lemma_max_n: int = 7,
) -> InstanceEvaluation:
    """Run every dual-path, lemma, and bound check on one instance."""
    stats = denominator_stats(matrix)
    structure = decompose(matrix)
    ev = InstanceEvaluation(
        label=label,
        matrix=matrix,
        rewards=tuple(int(x) for x in rewards) if rewards is not None else None,
        stats=stats,
        structure=structure,
        irreducible=is_irreducible(matrix),
    )
    _check_roundtrip(ev)
    _check_stats(ev)
    _check_structure(ev)
    _check_stationary(ev, budget)
    _check_absorption(ev, budget)
    _check_visits(ev, budget)
    if matrix.n <= forest_lemma_max_n:
        _check_forest_lemmas(ev, budget)
    _check_rewards(ev, budget)
    ev._add_checks(hadamard_comparison(stats))
    return ev


def random_suite(
    count: int,
    n_range: tuple[int, int],
    m_range: tuple[int, int],
    seed: int = 0,
    density: float | None = None,
) -> list[SuiteInstance]:
    """Seeded random instances, alternating plain chains and multichains.

    Every instance carries a reward vector with entries in [-10, 10].
    """
    instances: list[SuiteInstance] = []
    for i in range(count):
        rng = random.Random(f"suite:{seed}:{i}")
        n = rng.randint(*n_range)
        m = rng.randint(*m_range)
        dens = density if density is not None else rng.choice((0.3, 0.5, 0.75, 1.0))
        sub_seed = rng.randrange(2**32)
        if i % 2 == 1 and n >= 2:
            matrix = random_multichain(n, m, dens, sub_seed)
            kind = "multi"
        else:
            matrix = random_chain(n, m, dens, sub_seed)
            kind = "plain"
        rewards = tuple(rng.randint(-10, 10) for _ in range(n))
        instances.append(
            SuiteInstance(
                label=f"random[{i}]({kind},n={n},m={m})",
                matrix=matrix,
                rewards=rewards,
            )
        )
    return instances


def _rewards_for(label: str, n: int) -> tuple[int, ...]:
    rng = random.Random(f"rewards:{label}")
    return tuple(rng.randint(-10, 10) for _ in range(n))


def extremal_suite(
    n_range: tuple[int, int], m_range: tuple[int, int]
) -> list[SuiteInstance]:
    """The deterministic extremal instances inside the given ranges.

    Absorbing-family instances cover the whole (n, m) grid; cycle instances
    use the first n primes as weights (their denominator is then the n-th
    prime, independent of the m range); the shifted-prime cycle is included
    at its smallest size.
    """
    instances: list[SuiteInstance] = []
    for n in range(max(3, n_range[0]), n_range[1] + 1):
        for m in range(max(2, m_range[0]), m_range[1] + 1):
            gen = fig3_absorption(n, m)
            label = f"fig3(n={n},m={m})"
            instances.append(
                SuiteInstance(label, gen.matrix, _rewards_for(label, n))
            )
    for n in range(max(2, n_range[0]), n_range[1] + 1):
        gen = fig2_variant(first_primes(n))
        label = f"fig2-variant(primes,n={n})"
        instances.append(SuiteInstance(label, gen.matrix, _rewards_for(label, n)))
    gen = fig2_prime_cycle(2, 2)
    label = "fig2(n=2,q=2)"
    instances.append(SuiteInstance(label, gen.matrix, _rewards_for(label, 2)))
    return instances


def summarize(evaluations: Sequence[InstanceEvaluation]) -> dict[str, object]:
    """Deterministic aggregate over evaluations (order-independent)."""
    failures: list[str] = []
    bound_rows: dict[str, dict[str, object]] = {}
    property_rows: dict[str, dict[str, int]] = {}
    max_lcd = 1
    for ev in evaluations:
        failures.extend(ev.failures)
        max_lcd = max(max_lcd, ev.max_lcd)
        for check in ev.checks:
            row = bound_rows.setdefault(
                check.name,
                {"instances": 0, "passes": 0, "skipped": 0, "worst_tightness": None},
            )
            row["instances"] = int(row["instances"]) + 1
            if check.skipped:
                row["skipped"] = int(row["skipped"]) + 1
            if check.passed:
                row["passes"] = int(row["passes"]) + 1
            if check.tightness is not None:
                worst = row["worst_tightness"]
                if worst is None or check.tightness > worst:
                    row["worst_tightness"] = check.tightness
        for name, outcome in ev.properties.items():
            row = property_rows.setdefault(name, {"instances": 0, "passes": 0})
            row["instances"] += 1
            row["passes"] += outcome
    for row in bound_rows.values():
        worst = row["worst_tightness"]
        row["worst_tightness"] = (
            format_rational(worst) if isinstance(worst, Fraction) else None
        )
    return {
        "instances": len(evaluations),
        "failures": len(failures),
        "failure_messages": sorted(failures)[:100],
        "bounds": {name: bound_rows[name] for name in sorted(bound_rows)},
        "properties": {name: property_rows[name] for name in sorted(property_rows)},
        "max_observed_lcd": str(max_lcd),
    }


def _label(state: int) -> str:
    # Reports use 1-based state labels; the wire format stays positional.
    return str(state + 1)


def _fraction_map(values: dict[int, Fraction]) -> dict[str, str]:
    return {_label(v): format_rational(x) for v, x in values.items()}


def _decimal_map(values: dict[int, Fraction]) -> dict[str, float]:
    return {_label(v): float(x) for v, x in values.items()}


def build_report(ev: InstanceEvaluation, decimal: bool = False) -> dict[str, object]:
    """JSON-ready analysis report (sorted keys happen at serialization)."""
    matrix = ev.matrix
    structure = ev.structure
    class_names = [f"C{k + 1}" for k in range(structure.class_count)]

    report: dict[str, object] = {
        "n": matrix.n,
        "instance": {"P": matrix.to_string_rows()},
        "denominators": {
            "row_lcds": [str(x) for x in ev.stats.row_lcds],
            "global_lcd": str(ev.stats.global_lcd),
            "row_lcd_product": str(ev.stats.row_lcd_product),
            "nondeterministic_rows": ev.stats.nondeterministic_rows,
            "transient_row_lcd_product": str(structure.transient_row_lcd_product),
            "nondeterministic_transient_rows": structure.nondeterministic_transient_rows,
        },
        "structure": {
            "irreducible": ev.irreducible,
            "recurrent_classes": {
                name: [_label(v) for v in cls]
                for name, cls in zip(class_names, structure.recurrent_classes)
            },
            "transient_states": [_label(v) for v in structure.transient_states],
            "recurrent_state_count": structure.recurrent_state_count,
        },
    }
    if ev.rewards is not None:
        report["instance"]["r"] = [str(x) for x in ev.rewards]  # type: ignore[index]

    stationary_section: dict[str, object] = {}
    for name, pair in zip(class_names, ev.class_stationaries):
        values = dict(zip(pair.states, pair.tree.probabilities))
        entry: dict[str, object] = {
            "states": [_label(v) for v in pair.states],
            "distribution": _fraction_map(values),
            "lcd": str(lcd_of_vector(pair.tree.probabilities)),
            "method": pair.tree.method,
            "paths_agree": pair.agree,
        }
        if decimal:
            entry["distribution_decimal"] = _decimal_map(values)
        stationary_section[name] = entry
    report["stationary"] = stationary_section

    if ev.absorption_fundamental is not None:
        table = ev.absorption_forest or ev.absorption_fundamental
        psi = {
            _label(v): {
                name: format_rational(table.values[v][k])
                for k, name in enumerate(class_names)
            }
            for v in range(matrix.n)
        }
        absorption: dict[str, object] = {
            "method": table.method,
            "psi": psi,
            "lcd": str(lcd_of_vector(table.all_values())),
        }
        if "absorption_dual" in ev.properties:
            absorption["paths_agree"] = ev.properties["absorption_dual"]
        if decimal:
            absorption["psi_decimal"] = {
                _label(v): {
                    name: float(table.values[v][k])
                    for k, name in enumerate(class_names)
                }
                for v in range(matrix.n)
            }
        report["absorption"] = absorption

    if ev.visits_fundamental is not None:
        fm = ev.visits_fundamental
        report["visits"] = {
            "open_set": [_label(v) for v in fm.states],
            "expected_visits": {
                _label(v): {
                    _label(w): format_rational(fm.visit_count(v, w))
                    for w in fm.states
                }
                for v in fm.states
            },
            "paths_agree": ev.properties.get("visits_dual"),
        }

    if ev.gain_result is not None:
        gain_section: dict[str, object] = {
            "class_gains": {
                name: format_rational(x)
                for name, x in zip(class_names, ev.gain_result.class_gains)
            },
            "chi": _fraction_map(dict(enumerate(ev.gain_result.chi))),
            "constant": ev.gain_result.constant,
        }
        if decimal:
            gain_section["chi_decimal"] = _decimal_map(
                dict(enumerate(ev.gain_result.chi))
            )
        report["gain"] = gain_section

    if ev.bias_anchored is not None and ev.bias_weighted is not None:
        bias_section: dict[str, object] = {}
        for key, result in (
            ("anchored", ev.bias_anchored),
            ("weighted", ev.bias_weighted),
        ):
            entry = {
                "u": _fraction_map(dict(enumerate(result.u))),
                "hilbert_seminorm": format_rational(hilbert_seminorm(result.u)),
                "residuals_zero": ev.properties.get(f"bias_residuals_zero_{key}"),
            }
            if result.anchors is not None:
                entry["anchors"] = [_label(a) for a in result.anchors]
            if decimal:
                entry["u_decimal"] = _decimal_map(dict(enumerate(result.u)))
            bias_section[key] = entry
        report["bias"] = bias_section

    report["bounds"] = [check.to_json() for check in ev.checks]
    report["properties"] = dict(sorted(ev.properties.items()))
    report["failures"] = list(ev.failures)
    report["all_pass"] = ev.all_pass
    return report
