"""Adaptive invitation policies for k-hop collaboration cascades.

Models a referral process on an undirected social graph: invited users
accept with a per-user probability, acceptances recruit along edges that
succeed with per-edge probabilities, and participants earn hop-indexed
revenue. The package estimates conditional marginal benefits (exactly, by
Monte Carlo, or with a layered-BFS heuristic), runs adaptive greedy and
baseline invitation policies under size or per-community budgets, and
computes curvature-style approximation-ratio bounds.

Hot kernels run on a compiled backend when the extension built, with a
pure-Python fallback; set KHOPGAME_BACKEND=python|compiled to force one.
Equal seeds give bit-identical results on either backend.
"""

from ._backend import BACKEND
from .curvature import (
    CurvatureReport,
    approx_ratio,
    greedy_increment_gate,
    curvature_report,
    delta_data,
    delta_global,
    empirical_gamma,
    finite_budget_ratio,
    potential_vector,
)
from .errors import (
    ContractViolation,
    EnumerationCapExceeded,
    KhopGameError,
    ParseError,
    UndefinedBoundError,
    UndefinedRatioError,
    ValidationError,
)
from .estimator import (
    DEFAULT_MC_SAMPLES,
    ENUMERATION_CAP,
    Estimator,
    ExactEstimator,
    HeuristicEstimator,
    MarginalEstimate,
    MonteCarloEstimator,
    estimator_from_spec,
    exact_marginal,
    heuristic_marginal,
    invalidation_set,
    mc_marginal,
)
from .game import (
    HopAssignment,
    PartialRealization,
    TriState,
    assign_hops,
    current_revenue,
    revenue,
    simulate_invitation,
)
from .harness import (
    CellResult,
    ExperimentConfig,
    ExperimentResult,
    allocate_budgets,
    emit_csv,
    emit_plot,
    run_experiment,
)
from .network import (
    CommunityStructure,
    GameParams,
    Graph,
    GraphStats,
    graph_stats,
    load_communities,
    load_graph,
    neighbors,
)
from .policies import (
    BASELINE_KINDS,
    PartitionMatroid,
    PolicyTrace,
    RunResult,
    SizeBudget,
    StepRecord,
    baseline_solve,
    is_independent,
    rmcb_solve,
    rmsb_solve,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "__version__",
    "KhopGameError",
    "ParseError",
    "ValidationError",
    "ContractViolation",
    "EnumerationCapExceeded",
    "UndefinedBoundError",
    "UndefinedRatioError",
    "Graph",
    "GameParams",
    "CommunityStructure",
    "GraphStats",
    "graph_stats",
    "load_graph",
    "load_communities",
    "neighbors",
    "TriState",
    "PartialRealization",
    "HopAssignment",
    "assign_hops",
    "revenue",
    "current_revenue",
    "simulate_invitation",
    "MarginalEstimate",
    "Estimator",
    "ExactEstimator",
    "MonteCarloEstimator",
    "HeuristicEstimator",
    "estimator_from_spec",
    "exact_marginal",
    "mc_marginal",
    "heuristic_marginal",
    "invalidation_set",
    "ENUMERATION_CAP",
    "DEFAULT_MC_SAMPLES",
    "SizeBudget",
    "PartitionMatroid",
    "BASELINE_KINDS",
    "is_independent",
    "PolicyTrace",
    "StepRecord",
    "RunResult",
    "rmsb_solve",
    "rmcb_solve",
    "baseline_solve",
    "CurvatureReport",
    "curvature_report",
    "delta_global",
    "delta_data",
    "potential_vector",
    "approx_ratio",
    "finite_budget_ratio",
    "empirical_gamma",
    "greedy_increment_gate",
    "ExperimentConfig",
    "ExperimentResult",
    "CellResult",
    "allocate_budgets",
    "run_experiment",
    "emit_csv",
    "emit_plot",
]
