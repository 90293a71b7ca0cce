"""Bayesian binary regression with symmetric and asymmetric links.

The package fits Bernoulli regression models whose success probability
comes from the logit, probit, complementary log-log, or a
generalized-extreme-value (GEV) inverse-CDF link with a free shape
parameter, using random-walk Metropolis-Hastings.  It ships model
comparison criteria (DIC, BIC, marginal likelihood, holdout predictive
deviance), posterior-averaged covariate effects, separation
diagnostics, synthetic-data generators, and a command-line interface.
"""

from .compare import (
    ComparisonReport,
    DicResult,
    bic,
    dic,
    evaluate_model,
    holdout_split,
    marginal_likelihood_mh,
    posterior_predictive_deviance,
)
from .diagnostics import SeparationReport, binned_fit_table, separation_check
from .effects import AceResult, CHANGE_KINDS, CovariateChange, average_covariate_effect
from .gev import (
    GevMoments,
    GevParams,
    ag_skewness,
    gev_cdf,
    gev_log_pdf,
    gev_mode,
    gev_moments,
    gev_quantile,
    moment_match_normal,
)
from .links import (
    CLOGLOG,
    LINK_KINDS,
    LOGIT,
    PROBIT,
    Link,
    dinv_link_deta,
    gev_link,
    inv_link,
    link_fn,
)
from .model import (
    BinaryRegressionModel,
    ColumnTransform,
    Dataset,
    FlatBetaUniformXiPrior,
    JeffreysPrior,
    NormalPrior,
)
from .sampler import (
    Chain,
    McmcConfig,
    chain_diagnostics,
    chain_to_csv,
    effective_sample_size,
    geweke_z,
    hpd_interval,
    long_run_variance,
    posterior_mean,
    run_mh,
)
from .simdata import PRESETS, preset_dataset, simulate_binary, simulate_covariates

__version__ = "0.1.0"

__all__ = [
    "AceResult",
    "BinaryRegressionModel",
    "CHANGE_KINDS",
    "CLOGLOG",
    "Chain",
    "ColumnTransform",
    "ComparisonReport",
    "CovariateChange",
    "Dataset",
    "DicResult",
    "FlatBetaUniformXiPrior",
    "GevMoments",
    "GevParams",
    "JeffreysPrior",
    "LINK_KINDS",
    "LOGIT",
    "Link",
    "McmcConfig",
    "NormalPrior",
    "PRESETS",
    "PROBIT",
    "SeparationReport",
    "ag_skewness",
    "average_covariate_effect",
    "bic",
    "binned_fit_table",
    "chain_diagnostics",
    "chain_to_csv",
    "dic",
    "dinv_link_deta",
    "effective_sample_size",
    "evaluate_model",
    "gev_cdf",
    "gev_link",
    "gev_log_pdf",
    "gev_mode",
    "gev_moments",
    "gev_quantile",
    "geweke_z",
    "holdout_split",
    "hpd_interval",
    "inv_link",
    "link_fn",
    "long_run_variance",
    "marginal_likelihood_mh",
    "moment_match_normal",
    "posterior_mean",
    "posterior_predictive_deviance",
    "preset_dataset",
    "run_mh",
    "separation_check",
    "simulate_binary",
    "simulate_covariates",
]
