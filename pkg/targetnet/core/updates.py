"""
Target-network update rules

Pure functions implementing the hard, soft, T-soft, adaptive T-soft (AT-soft)
and consolidated adaptive T-soft (CAT-soft) updates on a single ParamSubset
and its rule state. Nothing in this module keeps hidden state or draws random
numbers: identical inputs give bit-identical outputs.

The stateful, per-network wrappers live in `targetnet.core.trackers`.
"""

import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ArgumentError, ConfigError, ContractError, NumericError, ShapeError
from .params import ParamSubset, check_finite, check_same_shape

# Negative log of the smallest normal float32; upper bound of w2.
W2_BOUND = 87.3365

DEFAULT_EPSILON = 1e-5

# Keeps the T-soft scale strictly positive once a long run of exact zeros
# has decayed it below the float64 range.
_TINY = float(np.finfo(np.float64).tiny)


def check_tau(tau: float, name: str = "tau") -> None:
    if not (isinstance(tau, (int, float)) and math.isfinite(tau) and 0.0 < tau <= 1.0):
        raise ConfigError(name, f"must be in (0, 1], got {tau!r}")


def check_unit_interval(value: float, name: str) -> None:
    if not (isinstance(value, (int, float)) and math.isfinite(value) and 0.0 <= value <= 1.0):
        raise ConfigError(name, f"must be in [0, 1], got {value!r}")


def check_positive(value: float, name: str) -> None:
    if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0.0):
        raise ConfigError(name, f"must be a positive finite number, got {value!r}")


@dataclass(frozen=True)
class SoftConfig:
    """Soft (exponential moving average) update configuration"""
    tau: float = 0.1

    def __post_init__(self):
        check_tau(self.tau)


@dataclass(frozen=True)
class ATSoftConfig:
    """
    Configuration shared by AT-soft and CAT-soft updates

    Attributes:
        tau: basic update ratio
        nu_lower: lower bound of the normalised degrees of freedom
            (smaller means higher maximum noise robustness)
        epsilon: stabiliser; also the initial scale and the scale floor
        lambda_c: consolidation strength
        q: quantile level selecting the consolidated elements
        consolidation_enabled: False gives plain AT-soft
    """
    tau: float = 0.1
    nu_lower: float = 1.0
    epsilon: float = DEFAULT_EPSILON
    lambda_c: float = 1.0
    q: float = 1.0
    consolidation_enabled: bool = False

    def __post_init__(self):
        check_tau(self.tau)
        check_positive(self.nu_lower, "nu_lower")
        check_positive(self.epsilon, "epsilon")
        check_unit_interval(self.lambda_c, "lambda_c")
        check_unit_interval(self.q, "q")


@dataclass(frozen=True)
class TSoftState:
    """Per-subset T-soft statistics: target, scalar scale and weight sum"""
    target: np.ndarray = field(repr=False)
    sigma_sq: float
    W: float

    def __post_init__(self):
        if not self.sigma_sq > 0.0:
            raise NumericError(f"T-soft sigma_sq must be positive, got {self.sigma_sq}")
        if not self.W >= 0.0:
            raise NumericError(f"T-soft W must be non-negative, got {self.W}")


@dataclass(frozen=True)
class ATSoftState:
    """Per-subset AT-soft statistics: target, per-element scale and nu_tilde"""
    target: np.ndarray = field(repr=False)
    sigma_sq: np.ndarray = field(repr=False)
    nu_tilde: float

    def __post_init__(self):
        if np.shape(self.sigma_sq) != np.shape(self.target):
            raise ShapeError(
                f"sigma_sq shape {np.shape(self.sigma_sq)} does not match target shape {np.shape(self.target)}"
            )


@dataclass(frozen=True)
class UpdateReport:
    """
    Diagnostics of one update of one subset

    For AT/CAT-soft, tau1 = tau * w1 / w1_bar, tau2 = tau * w2 / w2_bar and
    robustness = 1 - w1 / w1_bar. For T-soft, D is the normalised squared
    deviation, w1 the student-t weight, tau1 the effective target ratio and
    tau2 the scale ratio. Soft and hard updates report their fixed ratio.

    Reports returned by a full step carry the post-step nu_tilde and a
    post-step deviation_mean (measured after any consolidation); the report
    of `atsoft_statistics` alone carries the pre-step values.
    """
    D: float = 0.0
    w1: float = 1.0
    w2: float = 1.0
    w1_bar: float = 1.0
    w2_bar: float = 1.0
    tau1: float = 0.0
    tau2: float = 0.0
    tau_c: float = 0.0
    consolidated_indices: Tuple[int, ...] = ()
    deviation_mean: float = 0.0
    robustness: float = 0.0
    subset_id: str = ""
    nu_tilde: float = math.nan
    delta: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    def as_row(self) -> Dict[str, float]:
        return {
            "subset": self.subset_id,
            "D": self.D,
            "w1": self.w1,
            "w2": self.w2,
            "w1_bar": self.w1_bar,
            "w2_bar": self.w2_bar,
            "tau1": self.tau1,
            "tau2": self.tau2,
            "tau_c": self.tau_c,
            "consolidated": len(self.consolidated_indices),
            "deviation_mean": self.deviation_mean,
            "robustness": self.robustness,
            "nu_tilde": self.nu_tilde,
        }


def _deviation(main_values: np.ndarray, target: np.ndarray) -> float:
    return float(np.mean(np.abs(main_values - target)))


# ---------------------------------------------------------------------------
# Hard and soft updates
# ---------------------------------------------------------------------------

def hard_update(
    main: Sequence[ParamSubset],
    period: int,
    step: int,
    targets: Sequence[np.ndarray],
) -> List[np.ndarray]:
    """
    Copy every main subset into its target when `step` is a multiple of `period`

    Args:
        main: main-network subsets
        period: copy period (1 copies on every call)
        step: step counter, starting at 0
        targets: current target vectors, one per subset

    Returns:
        The updated target vectors (unchanged off-period)
    """
    if not isinstance(period, (int, np.integer)) or period < 1:
        raise ConfigError("period", f"must be a positive integer, got {period!r}")
    if not isinstance(step, (int, np.integer)) or step < 0:
        raise ConfigError("step", f"must be a non-negative integer, got {step!r}")
    if len(main) != len(targets):
        raise ShapeError(f"{len(main)} main subsets but {len(targets)} targets")
    for subset, target in zip(main, targets):
        check_same_shape(subset, target)

    if step % period == 0:
        return [subset.values.copy() for subset in main]
    return [np.asarray(target) for target in targets]


def soft_update(main: ParamSubset, target: np.ndarray, tau: float) -> np.ndarray:
    """
    Exponential moving average: target <- (1 - tau) * target + tau * main

    Evaluated as target + tau * (main - target), so a target equal to main is
    returned unchanged; tau = 1 copies main.
    """
    check_tau(tau)
    check_same_shape(main, target)
    check_finite(main, target, "target")
    if tau == 1.0:
        return main.values.copy()
    target = np.asarray(target, dtype=np.float64)
    return target + tau * (main.values - target)


# ---------------------------------------------------------------------------
# T-soft update
# ---------------------------------------------------------------------------

def tsoft_init(main: ParamSubset, tau: float, epsilon: float = DEFAULT_EPSILON) -> TSoftState:
    """Target copies main, W = (1 - tau) / tau, sigma = epsilon"""
    check_tau(tau)
    check_positive(epsilon, "epsilon")
    return TSoftState(target=main.values.copy(), sigma_sq=epsilon * epsilon, W=(1.0 - tau) / tau)


def tsoft_update(
    main: ParamSubset,
    state: TSoftState,
    tau: float,
    nu: float,
) -> Tuple[TSoftState, UpdateReport]:
    """
    One T-soft step on one subset

    The exponential moving average is treated as the location update of a
    one-dimensional student-t distribution over the mean squared deviation,
    with fixed degrees of freedom `nu`. All three state fields are computed
    from the pre-step state and replaced together.
    """
    check_tau(tau)
    check_positive(nu, "nu")
    check_same_shape(main, state.target)
    check_finite(main, state.target, "target")
    if not (math.isfinite(state.sigma_sq) and math.isfinite(state.W)):
        raise NumericError(f"T-soft state of subset '{main.id}' is not finite")

    theta, target = main.values, state.target
    delta_sq = float(np.mean((theta - target) ** 2))
    ratio = delta_sq / state.sigma_sq
    w = (nu + 1.0) / (nu + ratio)
    tau_i = w / (state.W + w)
    tau_sigma = tau * w * nu / (nu + 1.0)

    new_target = (1.0 - tau_i) * target + tau_i * theta
    new_sigma_sq = max((1.0 - tau_sigma) * state.sigma_sq + tau_sigma * delta_sq, _TINY)
    new_W = (1.0 - tau) * (state.W + w)

    new_state = TSoftState(target=new_target, sigma_sq=new_sigma_sq, W=new_W)
    w_bar = (nu + 1.0) / nu
    report = UpdateReport(
        D=ratio,
        w1=w,
        w2=w,
        w1_bar=w_bar,
        w2_bar=w_bar,
        tau1=tau_i,
        tau2=tau_sigma,
        deviation_mean=_deviation(theta, new_target),
        robustness=1.0 - w / w_bar,
        subset_id=main.id,
    )
    return new_state, report


# ---------------------------------------------------------------------------
# AT-soft / CAT-soft updates
# ---------------------------------------------------------------------------

def atsoft_init(main: ParamSubset, cfg: ATSoftConfig) -> ATSoftState:
    """Target copies main, sigma = epsilon elementwise, nu_tilde = nu_lower"""
    return ATSoftState(
        target=main.values.copy(),
        sigma_sq=np.full(main.size, cfg.epsilon * cfg.epsilon),
        nu_tilde=float(cfg.nu_lower),
    )


def _consolidation_ratio(cfg: ATSoftConfig, report: UpdateReport) -> float:
    return cfg.lambda_c * cfg.tau * (1.0 - report.w1 / report.w1_bar)


def atsoft_statistics(main: ParamSubset, state: ATSoftState, cfg: ATSoftConfig) -> UpdateReport:
    """
    Deviation statistics and update ratios of one AT-soft step

    Pure function of (main, state, cfg). The per-element normalised squared
    deviations are kept in `report.delta` so that consolidation can reuse the
    values computed before the target moved.
    """
    check_same_shape(main, state.target)
    check_finite(main, state.target, "target")
    sigma_sq = state.sigma_sq
    if np.any(sigma_sq <= 0.0) or not np.all(np.isfinite(sigma_sq)):
        raise NumericError(f"sigma_sq of subset '{main.id}' must be positive and finite")
    nu = float(state.nu_tilde)
    if not (math.isfinite(nu) and nu > 0.0):
        raise NumericError(f"nu_tilde of subset '{main.id}' must be positive, got {nu}")

    diff = main.values - state.target
    delta = diff * diff / sigma_sq
    D = float(np.mean(delta))

    w1 = (nu + 1.0) / (nu + D)
    w2 = w1 - math.log(w1)
    w1_bar = (nu + 1.0) / nu
    w2_bar = max(w1_bar - math.log(w1_bar), W2_BOUND)
    ratio = w1 / w1_bar

    report = UpdateReport(
        D=D,
        w1=w1,
        w2=w2,
        w1_bar=w1_bar,
        w2_bar=w2_bar,
        tau1=cfg.tau * ratio,
        tau2=cfg.tau * w2 / w2_bar,
        deviation_mean=float(np.mean(np.abs(diff))),
        robustness=1.0 - ratio,
        subset_id=main.id,
        nu_tilde=nu,
        delta=delta,
    )
    if cfg.consolidation_enabled:
        report = replace(report, tau_c=_consolidation_ratio(cfg, report))
    return report


def atsoft_update_amounts(
    main: ParamSubset,
    state: ATSoftState,
    cfg: ATSoftConfig,
    report: UpdateReport,
) -> Tuple[np.ndarray, np.ndarray, float]:
    """
    Update amounts (target', sigma_sq', nu_tilde') of one AT-soft step

    The max against epsilon^2 in the scale amount is taken per element.
    """
    if report.delta is None or report.delta.shape != state.target.shape:
        raise ContractError(f"report for subset '{main.id}' does not come from atsoft_statistics on this state")
    delta, sigma_sq, nu = report.delta, state.sigma_sq, float(state.nu_tilde)
    eps_sq = cfg.epsilon * cfg.epsilon

    target_amount = main.values
    sigma_amount = delta * sigma_sq + np.maximum(eps_sq, (delta - report.D) * sigma_sq / nu)
    nu_amount = (
        ((nu + 2.0) / (nu + 1.0) + nu) * (nu - cfg.nu_lower) / (nu * report.w2)
        + cfg.nu_lower
        + cfg.epsilon
    )
    return target_amount, sigma_amount, nu_amount


def atsoft_apply(
    main: ParamSubset,
    state: ATSoftState,
    cfg: ATSoftConfig,
    report: UpdateReport,
) -> ATSoftState:
    """Move target, scale and nu_tilde by the ratios in `report`"""
    target_amount, sigma_amount, nu_amount = atsoft_update_amounts(main, state, cfg, report)
    tau1, tau2 = report.tau1, report.tau2

    # Written as an increment so that main == target leaves the target bit-identical.
    new_target = state.target + tau1 * (target_amount - state.target)
    new_sigma_sq = np.maximum((1.0 - tau1) * state.sigma_sq + tau1 * sigma_amount, cfg.epsilon * cfg.epsilon)
    new_nu = max((1.0 - tau2) * state.nu_tilde + tau2 * nu_amount, cfg.nu_lower)

    if not (np.all(np.isfinite(new_target)) and np.all(np.isfinite(new_sigma_sq)) and math.isfinite(new_nu)):
        raise NumericError(f"AT-soft update of subset '{main.id}' produced non-finite state")
    return ATSoftState(target=new_target, sigma_sq=new_sigma_sq, nu_tilde=float(new_nu))


def quantile_threshold(values: np.ndarray, q: float) -> float:
    """
    Nearest-rank q-th quantile without interpolation

    Returns the element at 0-based index ceil(q * (d - 1)) of the ascending
    order, so q = 1 gives the maximum and q = 0 the minimum.
    """
    check_unit_interval(q, "q")
    values = np.asarray(values, dtype=np.float64).reshape(-1)
    if values.size == 0:
        raise ArgumentError("quantile of an empty vector is undefined")
    # round() absorbs representation error such as 0.7 * 10 = 7.000000000000001
    rank = math.ceil(round(q * (values.size - 1), 9))
    return float(np.partition(values, rank)[rank])


def consolidate(
    main: ParamSubset,
    state: ATSoftState,
    cfg: ATSoftConfig,
    report: UpdateReport,
) -> Tuple[ParamSubset, Tuple[int, ...]]:
    """
    Pull the outlying main parameters back toward the target

    Elements whose delta (from `report`, computed before the target moved)
    reaches the q-th quantile are moved by tau_c = lambda * tau * (1 - w1 / w1_bar)
    toward `state.target`. Only the main values change.

    Returns:
        (updated main subset, consolidated indices)
    """
    if not cfg.consolidation_enabled:
        return main, ()
    if report.delta is None or report.delta.shape != main.values.shape:
        raise ContractError(f"report for subset '{main.id}' carries no matching delta")
    check_same_shape(main, state.target)

    tau_c = _consolidation_ratio(cfg, report)
    threshold = quantile_threshold(report.delta, cfg.q)
    indices = np.flatnonzero(report.delta >= threshold)

    values = main.values.copy()
    if tau_c > 0.0:
        values[indices] += tau_c * (state.target[indices] - values[indices])
    return main.with_values(values), tuple(int(i) for i in indices)


def catsoft_step(
    main: ParamSubset,
    state: ATSoftState,
    cfg: ATSoftConfig,
) -> Tuple[ATSoftState, ParamSubset, UpdateReport]:
    """
    One CAT-soft step: statistics, apply, then (optionally) consolidation

    With `cfg.consolidation_enabled` False this is exactly the AT-soft update
    and `main` is returned untouched.
    """
    report = atsoft_statistics(main, state, cfg)
    new_state = atsoft_apply(main, state, cfg, report)
    new_main, indices = consolidate(main, new_state, cfg, report)

    report = replace(
        report,
        consolidated_indices=indices,
        deviation_mean=_deviation(new_main.values, new_state.target),
        nu_tilde=new_state.nu_tilde,
    )
    return new_state, new_main, report
