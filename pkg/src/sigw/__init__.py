"""Sliced inner-product Gromov-Wasserstein distances.

Compare probability measures living in Euclidean spaces of different
dimensions by the inner-product distortion of an optimal correspondence:
exact 1-d solutions via quantile couplings, a sliced estimator driven by
random directions and an orthonormal aligner optimized on the Stiefel
manifold, Gaussian closed forms for validation, and a clustering pipeline on
the resulting distance matrices.
"""

from .analysis import (
    ClusteringResult,
    DistanceMatrix,
    GaussianIGW,
    GaussianSlicedIGW,
    SlicedIGW,
    adjusted_rand_index,
    cka_distance,
    classical_mds_2d,
    pairwise_distances,
    purity,
    self_tuning_affinity,
    spectral_cluster,
)
from .errors import DataError, NumericalError, SigwError
from .gaussian import (
    GaussianAlignment,
    igw_gaussian,
    projected_igw_gaussian,
    sliced_igw_gaussian,
)
from .linalg import SymmetricEigen, qr_positive, sym_eigen
from .measures import (
    EmpiricalMeasure,
    GaussianMeasure,
    UnivariateSample,
    center,
    empirical_covariance,
    project,
    second_moment,
    second_moment_matrix,
)
from .optim import (
    ConvergedReason,
    OptimizerConfig,
    OptimizerTrace,
    PracticalStep,
    StiefelPoint,
    TheoreticalStep,
    dissolve_jacobian_apply,
    dissolve_map,
    objective_f,
    riemannian_grad,
    run_cd_subgradient,
    run_riemannian_subgradient,
    subgrad_f,
    subgrad_h,
    theoretical_constants,
)
from .slicing import (
    DirectionSet,
    SliceObjective,
    mc_estimate,
    sample_directions,
    slice_cost,
    slice_costs,
)
from .univariate import (
    Orientation,
    UnivariateIGWResult,
    igw_1d,
    quantile_coupling,
    quantile_coupling_correlation,
    reflect,
    w2_squared_1d,
)

__version__ = "0.1.0"

__all__ = [
    "ClusteringResult",
    "ConvergedReason",
    "DataError",
    "DirectionSet",
    "DistanceMatrix",
    "EmpiricalMeasure",
    "GaussianAlignment",
    "GaussianIGW",
    "GaussianMeasure",
    "GaussianSlicedIGW",
    "NumericalError",
    "OptimizerConfig",
    "OptimizerTrace",
    "Orientation",
    "PracticalStep",
    "SigwError",
    "SliceObjective",
    "SlicedIGW",
    "StiefelPoint",
    "SymmetricEigen",
    "TheoreticalStep",
    "UnivariateIGWResult",
    "UnivariateSample",
    "adjusted_rand_index",
    "center",
    "cka_distance",
    "classical_mds_2d",
    "dissolve_jacobian_apply",
    "dissolve_map",
    "empirical_covariance",
    "igw_1d",
    "igw_gaussian",
    "mc_estimate",
    "objective_f",
    "pairwise_distances",
    "project",
    "projected_igw_gaussian",
    "purity",
    "qr_positive",
    "quantile_coupling",
    "quantile_coupling_correlation",
    "reflect",
    "riemannian_grad",
    "run_cd_subgradient",
    "run_riemannian_subgradient",
    "sample_directions",
    "second_moment",
    "second_moment_matrix",
    "self_tuning_affinity",
    "slice_cost",
    "slice_costs",
    "sliced_igw_gaussian",
    "spectral_cluster",
    "subgrad_f",
    "subgrad_h",
    "sym_eigen",
    "theoretical_constants",
    "w2_squared_1d",
]
