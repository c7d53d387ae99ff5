"""
Tracking runs and metrics

`run_tracker` feeds a stream to one tracker and measures how far the target
strays from the clean base trajectory; `compare_rules` does this for several
rules on the same realisation.
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd

from ..core.errors import ArgumentError
from ..core.trackers import TSoftTracker, ATSoftTracker, UpdateConfig, build_tracker
from ..utils.logging import get_logger
from .streams import RNG_ALGORITHM, StreamSpec, SyntheticStream, generate_stream

TRACE_COLUMNS = ("step", "deviation_mean", "robustness", "tau1", "tau2", "tau_c", "nu_tilde", "tracking_error")

logger = get_logger("bench")


def burn_in_steps(horizon: int) -> int:
    """Steps excluded from the RMSE: the first 10% of the horizon, at least one"""
    return max(1, int(0.1 * horizon))


@dataclass
class TrackMetrics:
    """
    Result of one tracking run

    `deviation_mean_series` and `robustness_series` cover the steps from
    `burn_in` to the end (horizon - burn_in values); `trace` holds every
    step from 1 and is the CSV body.
    """
    rule: str
    tracking_rmse: float
    deviation_mean_series: np.ndarray = field(repr=False)
    robustness_series: np.ndarray = field(repr=False)
    final_sigma_sq: Optional[np.ndarray] = field(repr=False)
    final_nu_tilde: float
    burn_in: int
    trace: pd.DataFrame = field(repr=False)
    seed: Optional[int] = None

    @property
    def mean_deviation(self) -> float:
        return float(np.mean(self.deviation_mean_series)) if len(self.deviation_mean_series) else 0.0

    @property
    def mean_robustness(self) -> float:
        return float(np.mean(self.robustness_series)) if len(self.robustness_series) else 0.0

    def summary_row(self) -> dict:
        return {
            "rule": self.rule,
            "seed": self.seed,
            "tracking_rmse": self.tracking_rmse,
            "mean_deviation": self.mean_deviation,
            "mean_robustness": self.mean_robustness,
            "final_nu_tilde": self.final_nu_tilde,
            "rng": RNG_ALGORITHM,
        }


def run_tracker(stream: Sequence, rule: UpdateConfig, base: Optional[np.ndarray] = None) -> TrackMetrics:
    """
    Track a stream with one update rule

    The tracker starts from stream[0]; stream[1:] are fed as main parameters.
    Any consolidation acts on the fed value before its deviation is recorded.

    Args:
        stream: sequence of ParamSubset (a SyntheticStream or a plain list)
        rule: update rule configuration
        base: clean trajectory, one value per step; taken from the stream
            when it is a SyntheticStream, otherwise tracking errors are
            measured against zero

    Returns:
        TrackMetrics of the run
    """
    if len(stream) == 0:
        raise ArgumentError("cannot track an empty stream")
    if base is None:
        base = stream.base if isinstance(stream, SyntheticStream) else np.zeros(len(stream))
    base = np.asarray(base, dtype=np.float64)
    if base.shape != (len(stream),):
        raise ArgumentError(f"base trajectory has shape {base.shape}, expected ({len(stream)},)")

    horizon = len(stream)
    tracker = build_tracker(rule)
    tracker.reset([stream[0]])
    subset_id = tracker.subset_ids[0]

    errors = np.empty(horizon)
    errors[0] = _tracking_error(tracker.target(subset_id), base[0])
    rows = []
    for t in range(1, horizon):
        result = tracker.step([stream[t]])
        errors[t] = _tracking_error(tracker.target(subset_id), base[t])
        row = result.summary()
        row["step"] = t
        row["tracking_error"] = errors[t]
        rows.append(row)

    trace = pd.DataFrame(rows, columns=list(TRACE_COLUMNS))
    burn_in = burn_in_steps(horizon)
    tracked = errors[burn_in:] if horizon > burn_in else errors
    window = trace[trace["step"] >= burn_in]

    final_sigma_sq, final_nu_tilde = None, math.nan
    state = tracker.state(subset_id)
    if isinstance(tracker, ATSoftTracker):
        final_sigma_sq, final_nu_tilde = state.sigma_sq.copy(), state.nu_tilde
    elif isinstance(tracker, TSoftTracker):
        final_sigma_sq = np.full(state.target.shape, state.sigma_sq)
        final_nu_tilde = rule.nu

    metrics = TrackMetrics(
        rule=rule.label,
        tracking_rmse=float(np.sqrt(np.mean(tracked ** 2))),
        deviation_mean_series=window["deviation_mean"].to_numpy(),
        robustness_series=window["robustness"].to_numpy(),
        final_sigma_sq=final_sigma_sq,
        final_nu_tilde=float(final_nu_tilde),
        burn_in=burn_in,
        trace=trace,
        seed=stream.spec.seed if isinstance(stream, SyntheticStream) else None,
    )
    logger.info("tracking_run_finished", rule=metrics.rule, steps=horizon - 1, rmse=metrics.tracking_rmse)
    return metrics


def _tracking_error(target: np.ndarray, base_value: float) -> float:
    return float(np.sqrt(np.mean((target - base_value) ** 2)))


def run_comparison(spec: StreamSpec, rules: Sequence[UpdateConfig]) -> List[TrackMetrics]:
    """Run every rule on one realisation of `spec`"""
    if not rules:
        raise ArgumentError("at least one rule is required")
    stream = generate_stream(spec)
    logger.info("comparison_started", rules=[r.label for r in rules], seed=spec.seed, dim=spec.dim, horizon=spec.horizon)
    return [run_tracker(stream, rule) for rule in rules]


def compare_rules(spec: StreamSpec, rules: Sequence[UpdateConfig]) -> pd.DataFrame:
    """One summary row per rule, all rules on the same stream realisation"""
    return pd.DataFrame([m.summary_row() for m in run_comparison(spec, rules)])
