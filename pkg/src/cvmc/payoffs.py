"""Discounted payoffs of the supported contracts.

All payoffs have the form exp(-r*n/N) * (...)^+ over the n daily closing
prices S_d(1)..S_d(n); the day-0 price never enters an average or a
minimum. The vanilla European call exists purely as a closed-form
validation target for the simulation engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .model import MarketModel, PricePath

ASIAN_FLOATING = "asian_floating_strike"
ASIAN_FIXED = "asian_fixed_strike"
LOOKBACK_FLOATING = "lookback_floating"
EUROPEAN_CALL = "european_call"

CONTRACT_KINDS = frozenset({ASIAN_FLOATING, ASIAN_FIXED, LOOKBACK_FLOATING, EUROPEAN_CALL})
STRIKE_KINDS = frozenset({ASIAN_FIXED, EUROPEAN_CALL})


@dataclass(frozen=True)
class ContractSpec:
    """Contract terms: payoff kind, days to maturity, and strike if the
    payoff uses one (asian_fixed_strike and european_call only)."""

    kind: str
    days_to_maturity: int
    strike: float | None = None

    def __post_init__(self):
        if self.kind not in CONTRACT_KINDS:
            raise ValueError(
                f"unknown contract kind {self.kind!r}; expected one of {sorted(CONTRACT_KINDS)}"
            )
        if not isinstance(self.days_to_maturity, int) or self.days_to_maturity < 1:
            raise ValueError(
                f"days_to_maturity must be a positive integer, got {self.days_to_maturity!r}"
            )
        if self.kind in STRIKE_KINDS:
            if self.strike is None:
                raise ValueError(f"{self.kind} requires a strike")
            if not math.isfinite(self.strike) or self.strike <= 0:
                raise ValueError(f"strike must be > 0 and finite, got {self.strike!r}")
        elif self.strike is not None:
            raise ValueError(f"{self.kind} takes no strike, got {self.strike!r}")


def discount_factor(model: MarketModel, spec: ContractSpec) -> float:
    """exp(-r*n/N), the discount over the contract's n days."""
    return math.exp(-model.rate * spec.days_to_maturity / model.trading_days_per_year)


def discounted_payoff(model: MarketModel, spec: ContractSpec, prices: np.ndarray) -> np.ndarray:
    """Discounted payoff for one path (n,) or a batch of paths (runs, n).

    Returns a scalar for a single path, a (runs,) vector for a batch.
    The result is nonnegative on every path.
    """
    prices = np.asarray(prices)
    if prices.shape[-1] != spec.days_to_maturity:
        raise ValueError(
            f"path covers {prices.shape[-1]} days but contract has "
            f"{spec.days_to_maturity} days to maturity"
        )
    terminal = prices[..., -1]
    if spec.kind == ASIAN_FLOATING:
        intrinsic = terminal - prices.mean(axis=-1)
    elif spec.kind == ASIAN_FIXED:
        intrinsic = prices.mean(axis=-1) - spec.strike
    elif spec.kind == LOOKBACK_FLOATING:
        # The minimum includes day n, so the positive part never binds;
        # kept for safety against payoff variants that exclude it.
        intrinsic = terminal - prices.min(axis=-1)
    else:  # EUROPEAN_CALL
        intrinsic = terminal - spec.strike
    return discount_factor(model, spec) * np.maximum(intrinsic, 0.0)


def _path_payoff(model: MarketModel, spec: ContractSpec, path: PricePath, kind: str) -> float:
    if spec.kind != kind:
        raise ValueError(f"contract kind is {spec.kind!r}, expected {kind!r}")
    return float(discounted_payoff(model, spec, path.prices))


def payoff_asian_floating(model: MarketModel, spec: ContractSpec, path: PricePath) -> float:
    """exp(-r*n/N) * ( S_d(n) - mean_j S_d(j) )^+ ."""
    return _path_payoff(model, spec, path, ASIAN_FLOATING)


def payoff_asian_fixed(model: MarketModel, spec: ContractSpec, path: PricePath) -> float:
    """exp(-r*n/N) * ( mean_j S_d(j) - K )^+ ."""
    return _path_payoff(model, spec, path, ASIAN_FIXED)


def payoff_lookback(model: MarketModel, spec: ContractSpec, path: PricePath) -> float:
    """exp(-r*n/N) * ( S_d(n) - min_j S_d(j) )^+ ."""
    return _path_payoff(model, spec, path, LOOKBACK_FLOATING)


def payoff_european_call(model: MarketModel, spec: ContractSpec, path: PricePath) -> float:
    """exp(-r*n/N) * ( S_d(n) - K )^+ ."""
    return _path_payoff(model, spec, path, EUROPEAN_CALL)


def black_scholes_call(model: MarketModel, spec: ContractSpec) -> float:
    """Closed-form call value with maturity T = n/N years.

    Used to validate the plain Monte Carlo estimator. Requires
    volatility > 0; the zero-volatility model prices the call as the
    discounted deterministic payoff instead.
    """
    if spec.strike is None:
        raise ValueError("black_scholes_call requires a strike")
    if model.volatility <= 0:
        raise ValueError("black_scholes_call requires volatility > 0")
    s0 = model.initial_price
    k = spec.strike
    t = spec.days_to_maturity / model.trading_days_per_year
    sig_sqrt_t = model.volatility * math.sqrt(t)
    d1 = (math.log(s0 / k) + (model.rate + 0.5 * model.volatility**2) * t) / sig_sqrt_t
    d2 = d1 - sig_sqrt_t
    return s0 * norm.cdf(d1) - k * math.exp(-model.rate * t) * norm.cdf(d2)
