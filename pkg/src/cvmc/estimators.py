"""Monte Carlo estimators: plain, single-control, and multi-control.

The control-variate estimator replaces each payoff Y with
W = Y + sum_i beta_i * (C_i - E[C_i]), where the controls C_i are daily
log-returns (or a linear combination of them) whose means are exact
model quantities. Coefficients default to a pilot phase on independent
streams, which keeps the main-phase estimator exactly unbiased; the
in-sample mode reuses the estimation sample and carries an O(1/R) bias.

Moments are tracked in one pass with merge support, so large run counts
never hold samples in memory and batches can be processed independently
and merged in ascending batch order.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .model import LogReturnSampler, MarketModel, prices_from_log_returns
from .payoffs import ContractSpec, discounted_payoff

FORM_NONE = "none"
FORM_SINGLE = "single_terminal_log"
FORM_MULTI = "multi_log_returns"
FORM_CUSTOM = "custom_linear"
CONTROL_FORMS = frozenset({FORM_NONE, FORM_SINGLE, FORM_MULTI, FORM_CUSTOM})

SOURCE_PILOT = "pilot"
SOURCE_IN_SAMPLE = "in_sample"
COEFFICIENT_SOURCES = frozenset({SOURCE_PILOT, SOURCE_IN_SAMPLE})

# Controls whose variance is below this fraction of their second moment
# are treated as degenerate (coefficient forced to zero).
DEGENERATE_CONTROL_TOLERANCE = 1e-14

DEFAULT_BATCH_SIZE = 4096
DEFAULT_PILOT_FRACTION = 0.1


class MomentAccumulator:
    """One-pass mean/covariance tracker for a fixed set of variables.

    Accumulates observations one at a time or in batches and supports
    merging two accumulators built from disjoint sample sets; merging is
    exact up to rounding, so batch-parallel accumulation reproduces the
    single-pass result when merges happen in a fixed order.
    """

    def __init__(self, dim: int):
        if dim < 1:
            raise ValueError(f"dim must be >= 1, got {dim}")
        self.dim = dim
        self._count = 0
        self._mean = np.zeros(dim)
        self._m2 = np.zeros((dim, dim))  # sum of centered outer products

    @property
    def count(self) -> int:
        return self._count

    @property
    def mean(self) -> np.ndarray:
        return self._mean.copy()

    def add(self, x) -> None:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ValueError(f"expected shape ({self.dim},), got {x.shape}")
        self._count += 1
        delta = x - self._mean
        self._mean += delta / self._count
        self._m2 += np.outer(delta, delta) * ((self._count - 1) / self._count)

    def add_batch(self, xs) -> None:
        xs = np.asarray(xs, dtype=float)
        if xs.ndim != 2 or xs.shape[1] != self.dim:
            raise ValueError(f"expected shape (runs, {self.dim}), got {xs.shape}")
        runs = xs.shape[0]
        if runs == 0:
            return
        col_mean = xs.mean(axis=0)
        # A constant column must yield exactly zero variance, so center it
        # on the exact value rather than the rounded mean.
        constant = np.all(xs == xs[0], axis=0)
        if constant.any():
            col_mean = np.where(constant, xs[0], col_mean)
        centered = xs - col_mean
        m2 = np.einsum("bi,bj->ij", centered, centered)
        self._merge_parts(runs, col_mean, m2)

    def merge(self, other: "MomentAccumulator") -> None:
        """Fold another accumulator (over a disjoint sample set) into this one."""
        if other.dim != self.dim:
            raise ValueError("cannot merge accumulators of different dimension")
        self._merge_parts(other._count, other._mean, other._m2)

    def _merge_parts(self, count_b: int, mean_b: np.ndarray, m2_b: np.ndarray) -> None:
        if count_b == 0:
            return
        count_a = self._count
        total = count_a + count_b
        if count_a == 0:
            self._count = count_b
            self._mean = mean_b.copy()
            self._m2 = m2_b.copy()
            return
        delta = mean_b - self._mean
        self._mean = self._mean + delta * (count_b / total)
        self._m2 = self._m2 + m2_b + np.outer(delta, delta) * (count_a * count_b / total)
        self._count = total

    def copy(self) -> "MomentAccumulator":
        out = MomentAccumulator(self.dim)
        out._count = self._count
        out._mean = self._mean.copy()
        out._m2 = self._m2.copy()
        return out

    def covariance(self) -> np.ndarray:
        """Unbiased (count-1 denominator) covariance matrix."""
        if self._count < 2:
            raise ValueError(f"covariance undefined for count={self._count} (< 2)")
        return self._m2 / (self._count - 1)

    def variance(self, i: int = 0) -> float:
        return float(self.covariance()[i, i])

    def correlation(self, i: int, j: int) -> float:
        cov = self.covariance()
        denom = math.sqrt(cov[i, i] * cov[j, j])
        if denom == 0.0:
            raise ValueError(f"correlation undefined: variable {i} or {j} has zero variance")
        return float(np.clip(cov[i, j] / denom, -1.0, 1.0))


@dataclass(frozen=True)
class ControlSpec:
    """Which control variables to use and where their coefficients come from.

    Forms:
        none               no control; identical to the plain estimator.
        single_terminal_log V = sum_i X(i) = ln(S_d(n)/S(0)), one coefficient.
        multi_log_returns  one control per daily log-return X(i).
        custom_linear      V = sum_i weights[i] * X(i) with caller weights.
    """

    form: str
    coefficient_source: str = SOURCE_PILOT
    weights: np.ndarray | None = None

    def __post_init__(self):
        if self.form not in CONTROL_FORMS:
            raise ValueError(f"unknown control form {self.form!r}; expected one of {sorted(CONTROL_FORMS)}")
        if self.coefficient_source not in COEFFICIENT_SOURCES:
            raise ValueError(
                f"unknown coefficient_source {self.coefficient_source!r}; "
                f"expected one of {sorted(COEFFICIENT_SOURCES)}"
            )
        if self.form == FORM_CUSTOM:
            if self.weights is None:
                raise ValueError("custom_linear requires weights")
            w = np.asarray(self.weights, dtype=float)
            if w.ndim != 1 or w.size == 0:
                raise ValueError("weights must be a nonempty 1-D sequence")
            if not np.all(np.isfinite(w)):
                raise ValueError("weights must be finite")
            if np.all(w == 0.0):
                raise ValueError("weights must not be all zero")
            object.__setattr__(self, "weights", w)
        elif self.weights is not None:
            raise ValueError(f"{self.form} takes no weights")


@dataclass(frozen=True)
class ControlCoefficients:
    """Per-control multipliers and the exact model means of the controls."""

    values: np.ndarray
    control_means: np.ndarray


@dataclass(frozen=True)
class EstimatorReport:
    """Outcome of one estimation: point estimate plus variance diagnostics.

    empirical_variance_ratio is var(W)/var(Y) on the runs that produced
    the estimate; predicted_variance_ratio is 1 - sum_i corr^2(Y, C_i)
    for the multi-control form and 1 - corr^2(Y, V) otherwise, from the
    same runs. standard_error is sqrt(var(W)/runs_used).
    """

    estimate: float
    standard_error: float
    runs_used: int
    empirical_variance_ratio: float
    predicted_variance_ratio: float
    pilot_runs_used: int = 0
    coefficients: ControlCoefficients | None = None
    per_control_correlations: np.ndarray = field(default_factory=lambda: np.empty(0))
    notes: tuple[str, ...] = ()


class _Controls:
    """Control values, exact means, and exact variances for one form."""

    def __init__(self, model: MarketModel, spec: ContractSpec, control: ControlSpec):
        n = spec.days_to_maturity
        mean = model.daily_mean
        var = model.daily_variance
        if var == 0.0:
            raise ValueError("degenerate control: zero volatility makes every log-return constant")
        if control.form == FORM_SINGLE:
            self.dim = 1
            self.means = np.array([n * mean])
            self.exact_variances = np.array([n * var])
        elif control.form == FORM_MULTI:
            self.dim = n
            self.means = np.full(n, mean)
            self.exact_variances = np.full(n, var)
        elif control.form == FORM_CUSTOM:
            w = control.weights
            if w.size != n:
                raise ValueError(f"custom weights have length {w.size}, contract has n={n}")
            self.dim = 1
            self.means = np.array([mean * w.sum()])
            self.exact_variances = np.array([var * float(w @ w)])
        else:
            raise ValueError(f"no control values for form {control.form!r}")
        self.form = control.form
        self._weights = control.weights

    def values(self, log_returns: np.ndarray) -> np.ndarray:
        if self.form == FORM_SINGLE:
            return log_returns.sum(axis=1, keepdims=True)
        if self.form == FORM_MULTI:
            return log_returns
        return (log_returns @ self._weights)[:, None]


def _accumulate(
    model: MarketModel,
    spec: ContractSpec,
    seed: int,
    lo: int,
    hi: int,
    controls: _Controls | None,
    batch_size: int,
    extra_prices: bool = False,
) -> MomentAccumulator:
    """Moments of (Y, controls...) over runs lo..hi-1, batch-merged in order."""
    sampler = LogReturnSampler(model, spec.days_to_maturity, seed)
    dim = 1 + (controls.dim if controls is not None else 0)
    if extra_prices:
        dim += spec.days_to_maturity
    acc = MomentAccumulator(dim)
    for block_lo in range(lo, hi, batch_size):
        block_hi = min(block_lo + batch_size, hi)
        x = sampler.rows(block_lo, block_hi)
        prices = prices_from_log_returns(model, x)
        y = discounted_payoff(model, spec, prices)
        cols = [y[:, None]]
        if controls is not None:
            cols.append(controls.values(x))
        if extra_prices:
            cols.append(prices)
        acc.add_batch(np.hstack(cols))
    return acc


def plain_estimate(
    model: MarketModel,
    spec: ContractSpec,
    runs: int,
    seed: int,
    batch_size: int = DEFAULT_BATCH_SIZE,
) -> EstimatorReport:
    """Plain Monte Carlo: mean of Y over `runs` independent paths."""
    if runs < 2:
        raise ValueError(f"runs must be >= 2 (variance undefined below that), got {runs}")
    acc = _accumulate(model, spec, seed, 0, runs, None, batch_size)
    variance = acc.variance(0)
    return EstimatorReport(
        estimate=float(acc.mean[0]),
        standard_error=math.sqrt(variance / runs),
        runs_used=runs,
        empirical_variance_ratio=1.0,
        predicted_variance_ratio=1.0,
    )


def optimal_c(acc: MomentAccumulator) -> float:
    """Variance-minimizing multiplier -cov(Y,V)/var(V) from sample moments.

    The accumulator's first variable is Y, its second the control V.
    """
    cov = acc.covariance()
    if cov[1, 1] == 0.0:
        raise ValueError("degenerate control: sample variance of V is zero")
    return float(-cov[0, 1] / cov[1, 1])


def optimal_betas(acc: MomentAccumulator, variances: np.ndarray | None = None) -> np.ndarray:
    """Per-control multipliers -cov(Y, C_i)/var(C_i).

    The accumulator's first variable is Y; the rest are the controls.
    `variances` overrides the sample variances in the denominators with
    exact model values (the engine default for log-return controls).
    """
    cov = acc.covariance()
    denominators = np.diag(cov)[1:] if variances is None else np.asarray(variances, dtype=float)
    if denominators.shape != (acc.dim - 1,):
        raise ValueError(f"expected {acc.dim - 1} variances, got shape {denominators.shape}")
    if np.any(denominators == 0.0):
        raise ValueError("degenerate control: a control has zero variance")
    return -cov[0, 1:] / denominators


def insample_variance(acc: MomentAccumulator, betas: np.ndarray) -> float:
    """Sample variance of W = Y + sum_i betas[i]*(C_i - const) on acc's sample."""
    betas = np.asarray(betas, dtype=float)
    cov = acc.covariance()
    return float(cov[0, 0] + betas @ cov[1:, 1:] @ betas + 2.0 * (betas @ cov[1:, 0]))


def best_linear_variance_ratio(acc: MomentAccumulator) -> float:
    """min over all betas of var(W)/var(Y) on acc's sample.

    Solved jointly from the sample covariance matrix, so it is the exact
    in-sample optimum even when the controls are correlated; no linear
    control can do better on the same sample.
    """
    cov = acc.covariance()
    var_y = cov[0, 0]
    if var_y == 0.0:
        raise ValueError("variance of Y is zero; ratio undefined")
    cross = cov[1:, 0]
    betas, *_ = np.linalg.lstsq(cov[1:, 1:], cross, rcond=None)
    return float(1.0 - (cross @ betas) / var_y)


def predicted_ratio(acc: MomentAccumulator, control: ControlSpec) -> float:
    """Variance ratio predicted from sample correlations.

    1 - sum_i corr^2(Y, C_i) for multi_log_returns; 1 - corr^2(Y, V) for
    the one-control forms; 1 for no control.
    """
    if control.form == FORM_NONE:
        return 1.0
    cov = acc.covariance()
    var_y = cov[0, 0]
    if var_y == 0.0:
        return 1.0
    corr_sq = np.zeros(acc.dim - 1)
    control_vars = np.diag(cov)[1:]
    ok = control_vars > 0.0
    corr_sq[ok] = cov[0, 1:][ok] ** 2 / (var_y * control_vars[ok])
    if not ok.any():
        raise ValueError("degenerate control: every control has zero sample variance")
    if control.form == FORM_MULTI:
        return float(1.0 - corr_sq.sum())
    return float(1.0 - corr_sq[0])


def _coefficients(
    acc: MomentAccumulator,
    controls: _Controls,
    sample_control_variance: bool,
) -> tuple[np.ndarray, list[str]]:
    """Control multipliers from an accumulator, with degenerate controls zeroed."""
    cov = acc.covariance()
    if sample_control_variance:
        variances = np.diag(cov)[1:].copy()
        second_moment = variances + acc.mean[1:] ** 2
    else:
        variances = controls.exact_variances.copy()
        second_moment = variances + controls.means**2
    usable = variances > DEGENERATE_CONTROL_TOLERANCE * np.maximum(second_moment, 1e-300)
    notes: list[str] = []
    if not usable.any():
        raise ValueError("degenerate control: every control variance is (numerically) zero")
    if not usable.all():
        dropped = int((~usable).sum())
        message = f"{dropped} degenerate control(s) dropped (coefficient set to 0)"
        warnings.warn(message)
        notes.append(message)
    betas = np.zeros(controls.dim)
    betas[usable] = -cov[0, 1:][usable] / variances[usable]
    return betas, notes


def cv_estimate(
    model: MarketModel,
    spec: ContractSpec,
    control: ControlSpec,
    runs: int,
    pilot_fraction: float = DEFAULT_PILOT_FRACTION,
    seed: int = 0,
    batch_size: int = DEFAULT_BATCH_SIZE,
    sample_control_variance: bool = False,
) -> EstimatorReport:
    """Control-variate estimate of E[Y] over `runs` paths.

    With coefficient_source="pilot" the first ceil(pilot_fraction*runs)
    stream indices estimate the coefficients and the remaining streams
    produce the estimate, so E[W] = E[Y] exactly. With "in_sample" all
    runs serve both purposes (the textbook construction, small-sample
    biased).

    By default the coefficient denominators use the exact model variances
    of the controls; pass sample_control_variance=True to estimate them
    from the same sample instead (diagnostic mode).
    """
    if control.form == FORM_NONE:
        return plain_estimate(model, spec, runs, seed, batch_size)
    if runs < 4:
        raise ValueError(f"runs must be >= 4 for a control-variate estimate, got {runs}")
    controls = _Controls(model, spec, control)
    notes: list[str] = []

    if control.coefficient_source == SOURCE_PILOT:
        if not 0.0 < pilot_fraction < 1.0:
            raise ValueError(f"pilot_fraction must be in (0, 1), got {pilot_fraction}")
        pilot_runs = math.ceil(pilot_fraction * runs)
        main_runs = runs - pilot_runs
        if pilot_runs < 2 or main_runs < 2:
            raise ValueError(
                f"pilot split too small: {pilot_runs} pilot / {main_runs} main runs "
                f"(both must be >= 2)"
            )
        pilot_acc = _accumulate(model, spec, seed, 0, pilot_runs, controls, batch_size)
        betas, beta_notes = _coefficients(pilot_acc, controls, sample_control_variance)
        notes.extend(beta_notes)
        acc = _accumulate(model, spec, seed, pilot_runs, runs, controls, batch_size)
    else:
        pilot_runs = 0
        main_runs = runs
        acc = _accumulate(model, spec, seed, 0, runs, controls, batch_size)
        betas, beta_notes = _coefficients(acc, controls, sample_control_variance)
        notes.extend(beta_notes)
        notes.append(
            "in_sample coefficients reuse the estimation runs; the estimator carries an O(1/R) bias"
        )

    cov = acc.covariance()
    var_y = cov[0, 0]
    estimate = float(acc.mean[0] + betas @ (acc.mean[1:] - controls.means))
    # var(W) follows exactly from the sample covariance of (Y, controls)
    # because W is a fixed linear combination of them.
    var_w = max(insample_variance(acc, betas), 0.0)
    ratio = var_w / var_y if var_y > 0.0 else 1.0

    control_vars = np.diag(cov)[1:]
    correlations = np.zeros(controls.dim)
    defined = (control_vars > 0.0) & (var_y > 0.0)
    correlations[defined] = np.clip(
        cov[0, 1:][defined] / np.sqrt(var_y * control_vars[defined]), -1.0, 1.0
    )
    predicted = predicted_ratio(acc, control)
    if not -0.05 <= predicted <= 1.05:
        raise ValueError(
            f"predicted variance ratio {predicted:.6g} falls outside [-0.05, 1.05]; "
            f"the control moments look inconsistent"
        )

    return EstimatorReport(
        estimate=estimate,
        standard_error=math.sqrt(var_w / main_runs),
        runs_used=main_runs,
        empirical_variance_ratio=float(ratio),
        predicted_variance_ratio=float(predicted),
        pilot_runs_used=pilot_runs,
        coefficients=ControlCoefficients(values=betas, control_means=controls.means.copy()),
        per_control_correlations=correlations,
        notes=tuple(notes),
    )


def sweep_diagnostic(
    model: MarketModel,
    specs,
    runs: int,
    seed: int,
    batch_size: int = DEFAULT_BATCH_SIZE,
) -> list[dict]:
    """Empirical comparison of price-level versus log-return controls.

    For each contract, reports the best linear fit corr^2(Y, sum_i b_i S_d(i))
    next to sum_i corr^2(Y, X(i)). No ordering between the two is asserted;
    whether one bounds the other is an open question.
    """
    if model.volatility <= 0.0:
        raise ValueError("sweep_diagnostic requires volatility > 0")
    if runs < 2:
        raise ValueError(f"runs must be >= 2, got {runs}")
    rows = []
    for spec in specs:
        n = spec.days_to_maturity
        controls = _Controls(model, spec, ControlSpec(form=FORM_MULTI))
        acc = _accumulate(model, spec, seed, 0, runs, controls, batch_size, extra_prices=True)
        cov = acc.covariance()
        var_y = cov[0, 0]
        if var_y == 0.0:
            raise ValueError(f"payoff variance is zero for {spec.kind}; diagnostic undefined")
        x_vars = np.diag(cov)[1 : 1 + n]
        sum_corr_sq = float(np.sum(cov[0, 1 : 1 + n] ** 2 / (var_y * x_vars)))
        price_cov = cov[1 + n :, 1 + n :]
        price_cross = cov[1 + n :, 0]
        weights, *_ = np.linalg.lstsq(price_cov, price_cross, rcond=None)
        price_corr_sq = float((price_cross @ weights) / var_y)
        rows.append(
            {
                "kind": spec.kind,
                "days_to_maturity": n,
                "runs": runs,
                "corr2_price_combination": price_corr_sq,
                "sum_corr2_log_returns": sum_corr_sq,
            }
        )
    return rows
