"""Prevalence-aware efficacy estimation for two-arm trials.

Core pieces: a conditional-binomial posterior of efficacy whose spread
honestly tracks the disease incidence, classical pooled Wald and
information-bound risk-ratio intervals for comparison, matching
sample-size calculators, predictive-value diagnostics, and a seeded
Monte Carlo harness for empirical coverage checks.
"""

from .classical import fisher_rr_interval, wald_efficacy_interval, wald_log_variance
from .diagnostics import npv, ppv, prevalence_threshold
from .errors import (
    ClampedModeWarning,
    ConvergenceError,
    DegenerateDataError,
    DegenerateDensityError,
    DomainError,
    EstimationError,
    FalsePositiveParadoxError,
    ZeroCellError,
)
from .numerics import (
    Grid,
    grid_integral,
    grid_normalize,
    grid_quantile,
    log_binomial_coefficient,
    normal_cdf,
    normal_quantile,
    regularized_incomplete_beta,
)
from .posterior import (
    PosteriorGrid,
    cramer_rao_at_prevalence,
    cramer_rao_interval,
    credible_interval,
    fisher_information,
    log_likelihood,
    map_estimate,
    marginal_likelihood,
    marginalize_over_diagnostics,
    observed_rate,
    posterior,
    posterior_at_prevalence,
)
from .sample_size import (
    SampleSizeRow,
    SampleSizeSpec,
    cramer_rao_sample_size,
    generic_two_sample,
    sample_size_table,
    wald_sample_size,
)
from .simulate import (
    CoverageReport,
    MethodResult,
    ReplicateRecord,
    SimulationConfig,
    coverage_study,
    replicates_to_csv,
    simulate_trial,
)
from .trial import (
    PERFECT_TEST,
    TRIAL_PRESETS,
    DiagnosticProfile,
    EfficacyEstimate,
    IntervalEstimate,
    TrialCounts,
)

__version__ = "0.1.0"

__all__ = [
    "ClampedModeWarning",
    "ConvergenceError",
    "CoverageReport",
    "DegenerateDataError",
    "DegenerateDensityError",
    "DiagnosticProfile",
    "DomainError",
    "EfficacyEstimate",
    "EstimationError",
    "FalsePositiveParadoxError",
    "Grid",
    "IntervalEstimate",
    "MethodResult",
    "PERFECT_TEST",
    "PosteriorGrid",
    "ReplicateRecord",
    "SampleSizeRow",
    "SampleSizeSpec",
    "SimulationConfig",
    "TRIAL_PRESETS",
    "TrialCounts",
    "ZeroCellError",
    "coverage_study",
    "cramer_rao_at_prevalence",
    "cramer_rao_interval",
    "cramer_rao_sample_size",
    "credible_interval",
    "fisher_information",
    "fisher_rr_interval",
    "generic_two_sample",
    "grid_integral",
    "grid_normalize",
    "grid_quantile",
    "log_binomial_coefficient",
    "log_likelihood",
    "map_estimate",
    "marginal_likelihood",
    "marginalize_over_diagnostics",
    "normal_cdf",
    "normal_quantile",
    "npv",
    "observed_rate",
    "posterior",
    "posterior_at_prevalence",
    "ppv",
    "prevalence_threshold",
    "regularized_incomplete_beta",
    "replicates_to_csv",
    "sample_size_table",
    "simulate_trial",
    "wald_efficacy_interval",
    "wald_log_variance",
    "wald_sample_size",
]
