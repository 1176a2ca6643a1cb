"""Weighted sum-of-l1-norm convex clustering toolkit."""

from .core import (
    CenteredData,
    IndexSets,
    center_columns,
    check_data,
    contiguous_order,
    difference_operator,
    index_sets,
    pair_from_row_index,
    pair_pos,
    pair_row_index,
    pos_pair,
)
from .weights import EdgeSet, KernelParams, gaussian_edges, gaussian_weights, knn_sparsify
from .solver import (
    HALF,
    PAPER,
    SolverConfig,
    SolverState,
    admm_solve,
    augmented_lagrangian,
    kkt_residual,
    objective,
    soft_threshold,
)
from .extraction import (
    Assignment,
    PathPoint,
    PathResult,
    canonical_labels,
    extract_clusters,
    regularization_path,
    select_c_for_k,
)
from .baselines import KMeansResult, hierarchical, kmeanspp_init, lloyd
from .metrics import (
    ExactClusteringResult,
    SeparationStats,
    cluster_geometry,
    exact_clustering_check,
    rand_index,
    zhu_condition,
)
from .theory import (
    BallCheck,
    FeasibilityReport,
    GmmSeparationReport,
    SeparationReport,
    ball_condition,
    c_interval_k,
    c_interval_two,
    candidate_c_values,
    feasibility_report,
    gmm_separation_bound,
    r_lower_bound,
    search_feasible_r,
    separation_check,
)
from .datagen import (
    BallModelSpec,
    GmmSpec,
    embedded_circles,
    gaussian_mixture,
    load_csv,
    paper_gaussians,
    save_csv,
    stochastic_ball,
)

__version__ = "0.1.0"
