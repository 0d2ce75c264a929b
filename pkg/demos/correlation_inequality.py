"""
The correlation inequality, checked exactly
===========================================

For independent X_1..X_n and any Y and weights a_i:

    corr^2(Y, sum_i a_i X_i)  <=  sum_i corr^2(Y, X_i)

On finite discrete laws both sides are exact enumerations, so the bound
can be tested to machine precision. Independence is essential: the demo
ends with a dependent construction where the bound genuinely fails.
"""

from cvmc import FiniteJointDistribution, run_inequality_trials, correlation_inequality_check

# Equality witness: Y = X1 and weights picking X1 alone give lhs = rhs = 1.
dist = FiniteJointDistribution.independent(
    [([-1.0, 1.0], [0.5, 0.5]), ([0.0, 2.0], [0.3, 0.7]), ([-2.0, 1.0], [0.5, 0.5])]
).with_target(lambda row: row[0])
check = correlation_inequality_check(dist, [1.0, 0.0, 0.0])
print(f"equality witness: lhs={check.lhs:.12f} rhs={check.rhs:.12f} holds={check.holds}")

# A spread-out Y: both correlations contribute to the bound.
dist = FiniteJointDistribution.independent(
    [([-1.0, 1.0], [0.5, 0.5]), ([-1.0, 1.0], [0.5, 0.5])]
).with_target(lambda row: row[0] + row[1])
check = correlation_inequality_check(dist, [1.0, 1.0])
print(f"Y = X1 + X2:      lhs={check.lhs:.12f} rhs={check.rhs:.12f} holds={check.holds}")

# Randomized stress test: arbitrary Y tables over random independent
# marginals, random weights; the bound holds in every single trial.
summary = run_inequality_trials(trials=2000, seed=7)
print(
    f"\nrandomized trials: {summary.passes}/{summary.trials} hold, "
    f"max(lhs - rhs) = {summary.max_violation:.3e}"
)

# Dependence breaks the inequality's hypothesis -- and its conclusion.
# Take Z, U independent signs and set X1 = Z, X2 = U - Z, Y = U. Then
# Y is uncorrelated with X1, only partially correlated with X2, but
# X1 + X2 = U reproduces Y exactly.
atoms = [[u, z, u - z] for z in (-1.0, 1.0) for u in (-1.0, 1.0)]
dependent = FiniteJointDistribution.from_atoms(("Y", "X1", "X2"), atoms, [0.25] * 4)
check = correlation_inequality_check(dependent, [1.0, 1.0])
print(
    f"\ndependent X's:    lhs={check.lhs:.4f} rhs={check.rhs:.4f} holds={check.holds}"
    "  (violated, as expected)"
)
