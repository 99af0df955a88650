"""Clustering of uncertain graphs by connection probability."""

from .baselines import gmm
from .clustering import (
    DEFAULT_EPSILON,
    DEFAULT_GAMMA,
    DEFAULT_P_LOW,
    DEFAULT_SAMPLES_INIT,
    DEFAULT_SEED,
    Clustering,
    GuessSchedule,
    acp,
    brute_force_optimum,
    complete_clustering,
    mcp,
    min_partial,
    min_partial_d,
)
from .graph import (
    GraphFormatError,
    UncertainGraph,
    WorldSample,
    WorldSamplePool,
    collaboration_probability,
    d_reachable,
    extend_pool,
    load_graph,
    sample_world,
)
from .metrics import (
    ConfusionReport,
    GroundTruth,
    QualityReport,
    avg_prob,
    evaluate_predictions,
    inner_avpr,
    load_ground_truth,
    min_prob,
    outer_avpr,
    score_clustering,
)
from .oracle import (
    DEFAULT_UNCERTAIN_EDGE_LIMIT,
    ExactOracle,
    OracleLimitError,
    PoolEstimator,
    ProbEstimate,
    SamplePlan,
    exact_conditional_prob,
    exact_connection_prob,
    exact_d_connection_prob,
    exact_pairwise_matrix,
    harmonic,
    mc_estimate,
    mc_estimate_d,
    required_samples_pointwise,
    samples_acp,
    samples_mcp,
)

__version__ = "0.1.0"

__all__ = [
    "Clustering",
    "ConfusionReport",
    "ExactOracle",
    "GraphFormatError",
    "GroundTruth",
    "GuessSchedule",
    "OracleLimitError",
    "PoolEstimator",
    "ProbEstimate",
    "QualityReport",
    "SamplePlan",
    "UncertainGraph",
    "WorldSample",
    "WorldSamplePool",
    "acp",
    "avg_prob",
    "brute_force_optimum",
    "collaboration_probability",
    "complete_clustering",
    "d_reachable",
    "evaluate_predictions",
    "exact_conditional_prob",
    "exact_connection_prob",
    "exact_d_connection_prob",
    "exact_pairwise_matrix",
    "extend_pool",
    "gmm",
    "harmonic",
    "inner_avpr",
    "load_graph",
    "load_ground_truth",
    "mc_estimate",
    "mc_estimate_d",
    "mcp",
    "min_partial",
    "min_partial_d",
    "min_prob",
    "outer_avpr",
    "required_samples_pointwise",
    "sample_world",
    "samples_acp",
    "samples_mcp",
    "score_clustering",
    "DEFAULT_EPSILON",
    "DEFAULT_GAMMA",
    "DEFAULT_P_LOW",
    "DEFAULT_SAMPLES_INIT",
    "DEFAULT_SEED",
    "DEFAULT_UNCERTAIN_EDGE_LIMIT",
]
