"""Optimal sampling distributions over linear functionals of a Gaussian mean."""

from .closed_form import bk_optimal, bk_union_optimal, enumerate_bk, enumerate_bk_union
from .dag_dp import (
    AccessExitDistribution,
    AccessGraph,
    ExitDistribution,
    SourceDrainDag,
    dp_edge_f_matrix,
    dp_edge_info_matrix,
    dp_node_f_matrix,
    dp_node_info_matrix,
    enumerate_paths,
)
from .estimators import ExactDesign, MVUEstimator, ProductDesign
from .exact_solver import SolverOptions, SolverResult, solve_budgeted, solve_simplex
from .exceptions import EnumerationCapError, InfeasibleError, UnidentifiableError
from .model import (
    FunctionalSet,
    GenerativeModel,
    InfoMatrix,
    Objective,
    ObjectiveKind,
    build_f_matrix,
    build_info_matrix,
    check_identifiability,
    objective_value,
    simulate_estimation,
)
from .product_optimizer import OptimizeOptions, OptimizeResult, optimize_products, optimize_products_edges

__version__ = "0.1.0"

__all__ = [
    "AccessExitDistribution",
    "AccessGraph",
    "EnumerationCapError",
    "ExactDesign",
    "ExitDistribution",
    "FunctionalSet",
    "GenerativeModel",
    "InfeasibleError",
    "InfoMatrix",
    "MVUEstimator",
    "Objective",
    "ObjectiveKind",
    "OptimizeOptions",
    "OptimizeResult",
    "ProductDesign",
    "SolverOptions",
    "SolverResult",
    "SourceDrainDag",
    "UnidentifiableError",
    "bk_optimal",
    "bk_union_optimal",
    "build_f_matrix",
    "build_info_matrix",
    "check_identifiability",
    "dp_edge_f_matrix",
    "dp_edge_info_matrix",
    "dp_node_f_matrix",
    "dp_node_info_matrix",
    "enumerate_bk",
    "enumerate_bk_union",
    "enumerate_paths",
    "objective_value",
    "optimize_products",
    "optimize_products_edges",
    "simulate_estimation",
    "solve_budgeted",
    "solve_simplex",
]
