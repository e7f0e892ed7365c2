"""Identify the h most mutually correlated arms among K jointly Gaussian arms."""

from .algorithms import (
    AlgorithmOutcome,
    GaussianSource,
    OracleSource,
    make_source,
    naive_policy,
    phi_star_test,
    se_c,
    sr_c,
)
from .estimators import PairStatsTable, classical_estimate, diff_estimate
from .kernels import BACKEND
from .model import (
    CorrelationMatrix,
    ProblemInstance,
    Sampler,
    load_instance,
    make_lower_bound_instance,
    make_prime_instance,
    make_problem,
    sample_step,
    save_instance,
    validate_matrix,
)
from .objective import (
    alpha,
    alpha_inv,
    best_subset,
    beta,
    complexity_H_C,
    ratio_D,
    statistic_U,
    statistic_U_all,
    subset_score,
    suboptimality_ratio_R,
)

__version__ = "0.1.0"
