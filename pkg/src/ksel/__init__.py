"""Kernel-based non-redundant feature selection.

Feature selection by regressing a centered output kernel on feature-wise
centered input kernels under a non-negative L1 penalty (HSIC Lasso), its
spectrally normalized variant (NOCCO Lasso), and a greedy forward
baseline, with a certified convex solver and synthetic benchmarks.
"""

from .dataset import (
    CLASSIFICATION,
    REGRESSION,
    Dataset,
    gen_data1,
    gen_data2,
    load_csv,
    split,
)
from .dependence import QuadraticProblem, assemble_problem, hsic
from .errors import DataError, DegenerateBandwidth, KselError, NumericsError
from .kernels import (
    DEFAULT_NOCCO_EPSILON,
    CenteredGram,
    KernelSpec,
    center,
    delta_gram,
    gaussian_gram,
    load_precomputed_gram,
    median_bandwidth,
    nocco_transform,
)
from .selection import (
    SelectionResult,
    build_feature_grams,
    build_output_gram,
    fhsic_forward_select,
    fraction_correct,
    hsic_lasso_select,
    nocco_lasso_select,
    redundancy_rate,
)
from .solver import (
    LambdaSearch,
    Solution,
    SolverConfig,
    kkt_residual,
    lambda_max,
    objective_value,
    reg_path,
    search_lambda_for_k,
    solve_nn_lasso,
)

__version__ = "0.1.0"

__all__ = [
    "CLASSIFICATION",
    "REGRESSION",
    "Dataset",
    "gen_data1",
    "gen_data2",
    "load_csv",
    "split",
    "QuadraticProblem",
    "assemble_problem",
    "hsic",
    "DataError",
    "DegenerateBandwidth",
    "KselError",
    "NumericsError",
    "DEFAULT_NOCCO_EPSILON",
    "CenteredGram",
    "KernelSpec",
    "center",
    "delta_gram",
    "gaussian_gram",
    "load_precomputed_gram",
    "median_bandwidth",
    "nocco_transform",
    "SelectionResult",
    "build_feature_grams",
    "build_output_gram",
    "fhsic_forward_select",
    "fraction_correct",
    "hsic_lasso_select",
    "nocco_lasso_select",
    "redundancy_rate",
    "LambdaSearch",
    "Solution",
    "SolverConfig",
    "kkt_residual",
    "lambda_max",
    "objective_value",
    "reg_path",
    "search_lambda_for_k",
    "solve_nn_lasso",
    "__version__",
]
