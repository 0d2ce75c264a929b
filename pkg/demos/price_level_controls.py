"""
Price-level controls versus log-return controls
===============================================

How much payoff variance could a linear control over the daily PRICES
S_d(1)..S_d(n) remove, compared with the log-return bound
sum_i corr^2(Y, X(i))? Whether either quantity bounds the other in
general is open, so this is an empirical table only -- no inequality is
asserted.
"""

from cvmc import ContractSpec, MarketModel, sweep_diagnostic

model = MarketModel(initial_price=100.0, rate=0.05, volatility=0.2)
specs = [
    ContractSpec(kind="asian_fixed_strike", days_to_maturity=30, strike=100.0),
    ContractSpec(kind="asian_floating_strike", days_to_maturity=30),
    ContractSpec(kind="lookback_floating", days_to_maturity=30),
    ContractSpec(kind="european_call", days_to_maturity=30, strike=100.0),
]

rows = sweep_diagnostic(model, specs, runs=30_000, seed=11)
print(f"{'contract':<24}{'R2 price controls':>20}{'sum corr2 X(i)':>18}")
for row in rows:
    print(
        f"{row['kind']:<24}{row['corr2_price_combination']:>20.4f}"
        f"{row['sum_corr2_log_returns']:>18.4f}"
    )
print("\n(best linear fit over prices vs the log-return decomposition; empirical only)")
