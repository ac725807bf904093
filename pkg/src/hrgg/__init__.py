"""Hyperbolic random geometric graphs.

Sampling of Poisson point clouds in a hyperbolic ball, threshold-graph
construction, injective tree-embedding counts, closed-form expectation and
variance orders, normal-approximation error bounds, and the Monte Carlo
experiments that compare the two.
"""

__version__ = "0.1.0"

from .census import TreeSpec, add_one_cost, count_tree_embeddings, second_difference
from .experiments import (
    MODES,
    ExperimentConfig,
    ExperimentResult,
    fit_loglog,
    palm_second_moment,
    run_experiment,
)
from .geometry import (
    HyperbolicPoint,
    ModelParams,
    RadiusRule,
    connection_angle_threshold,
    connection_cos_gap,
    connection_probability_asymptotic,
    connection_probability_exact,
    hyperbolic_distance,
    kappa,
    radial_depth_density,
)
from .graph import (
    Graph,
    build_euclidean_graph,
    build_hyperbolic_graph,
    load_graph,
    restrict_annulus,
    save_graph,
)
from .sampling import (
    PointCloud,
    RngStream,
    load_point_cloud,
    sample_point_cloud,
    save_point_cloud,
)
from .theory import (
    RegimeError,
    RegimeReport,
    RegimeWarning,
    SteinBounds,
    VarianceOrders,
    a_gamma,
    expected_subtree_asymptotic,
    expected_subtree_exact,
    expected_subtree_full,
    log_expectation_limit,
    regime_classify,
    stein_bounds,
    variance_orders,
)

__all__ = [
    "__version__",
    "TreeSpec",
    "add_one_cost",
    "count_tree_embeddings",
    "second_difference",
    "MODES",
    "ExperimentConfig",
    "ExperimentResult",
    "fit_loglog",
    "palm_second_moment",
    "run_experiment",
    "HyperbolicPoint",
    "ModelParams",
    "RadiusRule",
    "connection_angle_threshold",
    "connection_cos_gap",
    "connection_probability_asymptotic",
    "connection_probability_exact",
    "hyperbolic_distance",
    "kappa",
    "radial_depth_density",
    "Graph",
    "build_euclidean_graph",
    "build_hyperbolic_graph",
    "load_graph",
    "restrict_annulus",
    "save_graph",
    "PointCloud",
    "RngStream",
    "load_point_cloud",
    "sample_point_cloud",
    "save_point_cloud",
    "RegimeError",
    "RegimeReport",
    "RegimeWarning",
    "SteinBounds",
    "VarianceOrders",
    "a_gamma",
    "expected_subtree_asymptotic",
    "expected_subtree_exact",
    "expected_subtree_full",
    "log_expectation_limit",
    "regime_classify",
    "stein_bounds",
    "variance_orders",
]
