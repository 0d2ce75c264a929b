"""Monte Carlo valuation of path-dependent options with control variates.

The package prices Asian and lookback options under risk-neutral GBM by
simulating daily log-returns, and reduces estimator variance with control
variates built from those log-returns: a single terminal-log control, a
caller-weighted linear combination, or the variance-optimal one-control-
per-day estimator. An exact finite-distribution oracle verifies the
underlying correlation inequality and the optimal-coefficient identities
by enumeration.
"""

__version__ = "0.1.0"

from .estimators import (
    ControlCoefficients,
    ControlSpec,
    EstimatorReport,
    MomentAccumulator,
    best_linear_variance_ratio,
    cv_estimate,
    insample_variance,
    optimal_betas,
    optimal_c,
    plain_estimate,
    predicted_ratio,
    sweep_diagnostic,
)
from .model import (
    MarketModel,
    PricePath,
    SeedSpec,
    build_path,
    log_returns_from_prices,
    prices_from_log_returns,
    sample_log_returns,
)
from .oracle import (
    ExactMoments,
    FiniteJointDistribution,
    InequalityCheck,
    InequalityTrialSummary,
    brute_force_cv_variance,
    exact_moments,
    run_inequality_trials,
    correlation_inequality_check,
)
from .payoffs import (
    ASIAN_FIXED,
    ASIAN_FLOATING,
    CONTRACT_KINDS,
    EUROPEAN_CALL,
    LOOKBACK_FLOATING,
    ContractSpec,
    black_scholes_call,
    discount_factor,
    discounted_payoff,
    payoff_asian_fixed,
    payoff_asian_floating,
    payoff_european_call,
    payoff_lookback,
)

__all__ = [
    "__version__",
    "MarketModel",
    "SeedSpec",
    "PricePath",
    "sample_log_returns",
    "build_path",
    "prices_from_log_returns",
    "log_returns_from_prices",
    "ContractSpec",
    "CONTRACT_KINDS",
    "ASIAN_FLOATING",
    "ASIAN_FIXED",
    "LOOKBACK_FLOATING",
    "EUROPEAN_CALL",
    "discount_factor",
    "discounted_payoff",
    "payoff_asian_floating",
    "payoff_asian_fixed",
    "payoff_lookback",
    "payoff_european_call",
    "black_scholes_call",
    "MomentAccumulator",
    "ControlSpec",
    "ControlCoefficients",
    "EstimatorReport",
    "plain_estimate",
    "cv_estimate",
    "optimal_c",
    "optimal_betas",
    "insample_variance",
    "best_linear_variance_ratio",
    "predicted_ratio",
    "sweep_diagnostic",
    "FiniteJointDistribution",
    "ExactMoments",
    "InequalityCheck",
    "InequalityTrialSummary",
    "exact_moments",
    "correlation_inequality_check",
    "brute_force_cv_variance",
    "run_inequality_trials",
]
