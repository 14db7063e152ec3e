"""Exact rational analysis of finite Markov chains.

Stationary distributions, absorption probabilities, visit counts, gains,
and bias vectors are computed over arbitrary-precision rationals by two
independent routes each (combinatorial forest sums and exact linear
algebra), and the denominators of the results are checked against their
proven bounds.
"""

from .analysis import (
    AbsorptionTable,
    BiasVector,
    GainVector,
    StationaryDistribution,
    absorption_by_fundamental,
    absorption_forest_formula,
    bias,
    bias_residuals,
    gain,
    hilbert_seminorm,
    simulate_absorption,
    stationary_tree_formula,
    visits,
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
    ChainError,
    DenominatorStats,
    Instance,
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
from .forests import (
    DEFAULT_ENUMERATION_BUDGET,
    EnumerationBudgetError,
    ForestFamily,
    RootedForest,
    enumerate_forests,
    enumerate_forests_with_path,
    forest_weight_sum_det,
    tree_weight_sum_det,
)
from .generators import (
    GeneratedInstance,
    fig2_prime_cycle,
    fig2_variant,
    fig3_absorption,
    random_chain,
    random_multichain,
)
from .linalg import (
    FundamentalMatrix,
    SingularMatrixError,
    det,
    fundamental_matrix,
    invert,
    solve,
    stationary_by_solve,
)
from .structure import (
    ChainStructure,
    NotIrreducibleError,
    NotOpenError,
    decompose,
    is_irreducible,
    is_open,
)
from .verify import build_report, evaluate_instance, summarize

__version__ = "0.1.0"
