"""Prior-free inferential models: associations, predictive random sets,
belief/plausibility functions, and their frequency-calibration checks."""

from .kernel import (
    BracketError,
    DomainError,
    NumericError,
    QuadratureError,
    QuadratureSpec,
    RandomStream,
    find_root,
    gamma_cdf,
    gamma_quantile,
    integrate,
    noncentral_t_cdf,
    norm_cdf,
    norm_quantile,
    poisson_pmf,
)

__version__ = "0.1.0"
