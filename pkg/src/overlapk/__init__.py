"""overlapk: the Weitzman overlap coefficient among k >= 2 distributions.

Exact values come from adaptive quadrature of the pointwise-minimum density;
sample-based values from Gaussian kernel density estimates plugged into the
moment form ``E[min_m f_m(X_i) / f_i(X_i)]``.
"""

__version__ = "0.1.0"

from .distributions import DistributionSpec, Family, Sample, Support, cdf, pdf, quantile, sample
from .errors import (
    ConfigError,
    DegenerateSampleError,
    IntegrationError,
    OverlapError,
    ParameterError,
    UsageError,
)
from .kde import Boundary, KdeModel, fit, silverman_bandwidth
from .overlap import (
    Diagnostics,
    EstimatorResult,
    ExactResult,
    IndexSubset,
    all_subsets,
    estimate_all,
    estimate_avg,
    estimate_single,
    estimate_subset,
    exact_delta,
    min_density,
)
from .simulation import (
    StudyCase,
    StudyConfig,
    StudyReport,
    relative_bias,
    relative_rmse,
    run_replicate,
    run_study,
)

__all__ = [
    "Boundary",
    "ConfigError",
    "DegenerateSampleError",
    "Diagnostics",
    "DistributionSpec",
    "EstimatorResult",
    "ExactResult",
    "Family",
    "IndexSubset",
    "IntegrationError",
    "KdeModel",
    "OverlapError",
    "ParameterError",
    "Sample",
    "StudyCase",
    "StudyConfig",
    "StudyReport",
    "Support",
    "UsageError",
    "all_subsets",
    "cdf",
    "estimate_all",
    "estimate_avg",
    "estimate_single",
    "estimate_subset",
    "exact_delta",
    "fit",
    "min_density",
    "pdf",
    "quantile",
    "relative_bias",
    "relative_rmse",
    "run_replicate",
    "run_study",
    "sample",
    "silverman_bandwidth",
]
