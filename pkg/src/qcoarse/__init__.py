"""Operator-algebra coarse-graining: generalized bipartitions, the associated
coarse-graining channel and its maximum-entropy dual, state ensembles with
banded-random-matrix statistics, and the query costs of resolving what the
coarse description hides."""

from .qcore import (
    Operator,
    DensityMatrix,
    PureState,
    RngStream,
    fidelity,
    haar_unitary,
    hs_inner,
    partial_trace,
    random_pure_state,
    trace_distance,
    trace_distance_variational,
    trace_norm,
    von_neumann_entropy,
)
from .algebra import (
    DecompositionError,
    GeneralizedBipartition,
    OperatorAlgebra,
    Sector,
    bipartition_algebra,
    bipartition_from_shapes,
    close_algebra,
    commutant,
    verify_algebra,
    wedderburn_decompose,
)
from .channel import (
    CoarseState,
    ConvergenceError,
    MaxEntropyResult,
    algebra_expectations,
    apply_cir,
    lift,
    max_entropy_state,
    verify_jaynes,
)
from .ensembles import (
    EthAnsatzParams,
    EthEnsemble,
    EthStats,
    energy_window_ensemble,
    haar_sector_ensemble,
    measure_eth_stats,
    microcanonical_density,
    pairwise_reduced_distances,
    reduced_states,
    rotated_pair,
    synthetic_eth_observable,
)
from .grover import (
    DeviationTrace,
    DistinguishPlan,
    GroverPlan,
    bbbv_deviation,
    distinguish_sim,
    grover_search_2d,
    grover_search_full,
    plan_distinguish,
    pure_pair_at_distance,
)
from .extremes import (
    SuppressionForecast,
    expected_max_quantile,
    fit_suppression_curve,
    forecast_suppression,
    monte_carlo_max_mean,
)

__version__ = "0.1.0"

__all__ = [
    "Operator", "DensityMatrix", "PureState", "RngStream",
    "fidelity", "haar_unitary", "hs_inner", "partial_trace",
    "random_pure_state", "trace_distance", "trace_distance_variational",
    "trace_norm", "von_neumann_entropy",
    "DecompositionError", "GeneralizedBipartition", "OperatorAlgebra", "Sector",
    "bipartition_algebra", "bipartition_from_shapes", "close_algebra",
    "commutant", "verify_algebra", "wedderburn_decompose",
    "CoarseState", "ConvergenceError", "MaxEntropyResult",
    "algebra_expectations", "apply_cir", "lift", "max_entropy_state",
    "verify_jaynes",
    "EthAnsatzParams", "EthEnsemble", "EthStats", "energy_window_ensemble",
    "haar_sector_ensemble", "measure_eth_stats", "microcanonical_density",
    "pairwise_reduced_distances", "reduced_states", "rotated_pair",
    "synthetic_eth_observable",
    "DeviationTrace", "DistinguishPlan", "GroverPlan", "bbbv_deviation",
    "distinguish_sim", "grover_search_2d", "grover_search_full",
    "plan_distinguish", "pure_pair_at_distance",
    "SuppressionForecast", "expected_max_quantile", "fit_suppression_curve",
    "forecast_suppression", "monte_carlo_max_mean",
    "__version__",
]
