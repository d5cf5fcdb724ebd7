"""netmatch: semiparametric network regression via codegree matching.

Outcomes depend on observed covariates and on an unobserved social influence
that is driven by how each agent links in a network. Instead of modeling the
network parametrically, the estimator matches pairs of agents with similar
columns of the squared adjacency matrix (similar shared-neighbor profiles),
differences their outcomes to remove the influence, and recovers the
influence itself by kernel-weighted residual averaging.
"""

from .codegree import CodegreeDistance, codegree_distance_matrix, squared_adjacency
from .estimate import (
    EstimationResult,
    KernelSpec,
    NetworkRegression,
    bandwidth_diagnostic,
    estimate,
    fit_coefficients,
    fit_influence,
    kernel_eval,
    select_bandwidth,
)
from .exceptions import BandwidthTargetError, InputDataError, SingularSystemError
from .experiments import ExperimentConfig, ExperimentReport, run_experiment
from .graphon import (
    GraphonSpec,
    HolderConstants,
    certify_holder_constants,
    codegree_distance,
    codegree_function,
    default_grid,
    eval_graphon,
    link_function,
    network_distance,
    pair_distances,
    peer_effect_influence,
    population_statistics,
    type_distance_matrix,
    verify_contraction_bound,
    verify_inversion_bound,
)
from .quadrature import QuadratureGrid
from .simulate import (
    BlockLevelInfluence,
    CovariateMean,
    LinearInfluence,
    OutcomeSpec,
    PeerInfluence,
    Sample,
    ZeroInfluence,
    draw_sample,
    ingest_sample,
    true_influence,
)

__version__ = "0.1.0"

__all__ = [
    "BandwidthTargetError",
    "BlockLevelInfluence",
    "CodegreeDistance",
    "CovariateMean",
    "EstimationResult",
    "ExperimentConfig",
    "ExperimentReport",
    "GraphonSpec",
    "HolderConstants",
    "InputDataError",
    "KernelSpec",
    "LinearInfluence",
    "NetworkRegression",
    "OutcomeSpec",
    "PeerInfluence",
    "QuadratureGrid",
    "Sample",
    "SingularSystemError",
    "ZeroInfluence",
    "bandwidth_diagnostic",
    "certify_holder_constants",
    "codegree_distance",
    "codegree_distance_matrix",
    "codegree_function",
    "default_grid",
    "draw_sample",
    "estimate",
    "eval_graphon",
    "fit_coefficients",
    "fit_influence",
    "ingest_sample",
    "kernel_eval",
    "link_function",
    "network_distance",
    "pair_distances",
    "peer_effect_influence",
    "population_statistics",
    "run_experiment",
    "select_bandwidth",
    "squared_adjacency",
    "true_influence",
    "type_distance_matrix",
    "verify_contraction_bound",
    "verify_inversion_bound",
]
