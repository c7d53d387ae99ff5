"""
Stateful target trackers

A tracker owns the target parameters (and any rule statistics) of one
network, one state per registered ParamSubset. `reset(main)` initialises
from the main network, `step(main)` applies the configured rule to every
subset and returns the possibly-consolidated main subsets together with the
per-subset reports.
"""

import math
from abc import ABC, abstractmethod
from dataclasses import asdict, dataclass, fields
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np


from ..utils import serialization
from ..utils.logging import get_logger
from .errors import ConfigError, ContractError, ShapeError
from .params import ParamSubset, match_subsets
from .updates import (
    DEFAULT_EPSILON,
    ATSoftConfig,
    ATSoftState,
    SoftConfig,
    TSoftState,
    UpdateReport,
    check_positive,
    check_tau,
    check_unit_interval,
    atsoft_init,
    catsoft_step,
    hard_update,
    soft_update,
    tsoft_init,
    tsoft_update,
)

RULES = ("hard", "soft", "tsoft", "atsoft", "catsoft")

SNAPSHOT_FORMAT = "targetnet.tracker/1"


@dataclass(frozen=True)
class UpdateConfig:
    """
    Target update rule selection and hyperparameters

    Only the fields relevant to `rule` are used: `period` for hard updates,
    `nu` for T-soft, `nu_lower`/`epsilon` for AT-soft, and additionally
    `lambda_c`/`q` when consolidating. `rule="catsoft"` always consolidates;
    `rule="atsoft"` consolidates only when `consolidate` is set.
    """
    rule: str = "soft"
    tau: float = 0.1
    period: int = 1
    nu: float = 1.0
    nu_lower: float = 1.0
    epsilon: float = DEFAULT_EPSILON
    lambda_c: float = 1.0
    q: float = 1.0
    consolidate: bool = False

    def __post_init__(self):
        if self.rule not in RULES:
            raise ConfigError("rule", f"must be one of {', '.join(RULES)}, got {self.rule!r}")
        check_tau(self.tau)
        if isinstance(self.period, bool) or not isinstance(self.period, (int, np.integer)) or self.period < 1:
            raise ConfigError("period", f"must be a positive integer, got {self.period!r}")
        check_positive(self.nu, "nu")
        check_positive(self.nu_lower, "nu_lower")
        check_positive(self.epsilon, "epsilon")
        check_unit_interval(self.lambda_c, "lambda_c")
        check_unit_interval(self.q, "q")

    @classmethod
    def preset(cls, rule: str, **overrides: Any) -> "UpdateConfig":
        """Published method settings: tau=0.1, nu=1, nu_lower=1, lambda=1, q=1"""
        base = {"rule": rule, "tau": 0.1, "nu": 1.0, "nu_lower": 1.0, "lambda_c": 1.0, "q": 1.0}
        if rule == "catsoft":
            base["consolidate"] = True
        base.update(overrides)
        return cls(**base)

    @property
    def consolidation_enabled(self) -> bool:
        return self.rule == "catsoft" or (self.rule == "atsoft" and self.consolidate)

    @property
    def label(self) -> str:
        return self.rule

    def to_soft(self) -> SoftConfig:
        return SoftConfig(tau=self.tau)

    def to_atsoft(self) -> ATSoftConfig:
        return ATSoftConfig(
            tau=self.tau,
            nu_lower=self.nu_lower,
            epsilon=self.epsilon,
            lambda_c=self.lambda_c,
            q=self.q,
            consolidation_enabled=self.consolidation_enabled,
        )

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "UpdateConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(unknown[0], "unknown update option")
        return cls(**data)


@dataclass(frozen=True)
class TrackerStep:
    """One tracker step over all subsets of a network"""
    step: int
    main: Tuple[ParamSubset, ...]
    reports: Tuple[UpdateReport, ...]

    @property
    def deviation_mean(self) -> float:
        """Mean |theta - target| over all parameters of the network"""
        sizes = np.array([s.size for s in self.main], dtype=np.float64)
        deviations = np.array([r.deviation_mean for r in self.reports])
        return float(np.dot(sizes, deviations) / sizes.sum())

    @property
    def robustness(self) -> float:
        return float(np.mean([r.robustness for r in self.reports]))

    @property
    def tau1(self) -> float:
        return float(np.mean([r.tau1 for r in self.reports]))

    @property
    def tau2(self) -> float:
        return float(np.mean([r.tau2 for r in self.reports]))

    @property
    def tau_c(self) -> float:
        return float(np.mean([r.tau_c for r in self.reports]))

    @property
    def nu_tilde(self) -> float:
        return float(np.mean([r.nu_tilde for r in self.reports]))

    @property
    def consolidated_count(self) -> int:
        return sum(len(r.consolidated_indices) for r in self.reports)

    def summary(self) -> Dict[str, float]:
        return {
            "step": self.step,
            "deviation_mean": self.deviation_mean,
            "robustness": self.robustness,
            "tau1": self.tau1,
            "tau2": self.tau2,
            "tau_c": self.tau_c,
            "nu_tilde": self.nu_tilde,
            "consolidated": self.consolidated_count,
        }


class TargetTracker(ABC):
    """
    Base class of the per-network target trackers

    Features:
    - One independent rule state per registered subset
    - All subset states replaced together after a successful step
    - JSON snapshots for checkpoint and resume
    """

    rule: str = ""

    def __init__(self, config: UpdateConfig):
        if config.rule != self.rule:
            raise ConfigError("rule", f"{type(self).__name__} cannot run rule {config.rule!r}")
        self.config = config
        self.logger = get_logger("tracker", rule=config.rule)
        self.step_count = 0
        self._ids: Tuple[str, ...] = ()
        self._states: Dict[str, Any] = {}

    def reset(self, main: Sequence[ParamSubset]) -> None:
        """Initialise one state per subset from the main parameters"""
        ids = tuple(s.id for s in main)
        if not ids:
            raise ShapeError("a tracker needs at least one subset")
        if len(set(ids)) != len(ids):
            raise ShapeError(f"duplicate subset ids in {list(ids)}")
        self._ids = ids
        self._states = {s.id: self._init_state(s) for s in main}
        self.step_count = 0
        self.logger.debug("tracker_reset", subsets=len(ids), parameters=sum(s.size for s in main))

    def step(self, main: Sequence[ParamSubset]) -> TrackerStep:
        """
        Apply the update rule to every subset

        Args:
            main: current main subsets, in registration order

        Returns:
            TrackerStep carrying the main subsets after any consolidation
        """
        if not self._ids:
            raise ContractError("reset() must be called before step()")
        main = match_subsets(main, self._ids)

        states: Dict[str, Any] = {}
        new_main: List[ParamSubset] = []
        reports: List[UpdateReport] = []
        for subset in main:
            state, updated, report = self._update(subset, self._states[subset.id])
            states[subset.id] = state
            new_main.append(updated)
            reports.append(report)

        self._states = states
        result = TrackerStep(self.step_count, tuple(new_main), tuple(reports))
        self.step_count += 1
        return result

    @property
    def subset_ids(self) -> Tuple[str, ...]:
        return self._ids

    def state(self, subset_id: str) -> Any:
        if subset_id not in self._states:
            raise KeyError(f"unknown subset '{subset_id}'")
        return self._states[subset_id]

    def target(self, subset_id: str) -> np.ndarray:
        return self._target_of(self.state(subset_id)).copy()

    @property
    def targets(self) -> Dict[str, np.ndarray]:
        return {sid: self.target(sid) for sid in self._ids}

    def target_subsets(self) -> List[ParamSubset]:
        return [ParamSubset(sid, self._target_of(self._states[sid])) for sid in self._ids]

    def state_dict(self) -> Dict[str, Any]:
        return {
            "format": SNAPSHOT_FORMAT,
            "rule": self.config.rule,
            "config": self.config.to_dict(),
            "step": self.step_count,
            "subsets": [dict(id=sid, **self._state_to_dict(self._states[sid])) for sid in self._ids],
        }

    def load_state_dict(self, doc: Dict[str, Any]) -> None:
        doc = serialization.check_format(doc, SNAPSHOT_FORMAT)
        if doc.get("rule") != self.config.rule:
            raise ConfigError("rule", f"snapshot holds rule {doc.get('rule')!r}, tracker runs {self.config.rule!r}")
        entries = doc["subsets"]
        ids = tuple(entry["id"] for entry in entries)
        if self._ids and ids != self._ids:
            raise ShapeError(f"snapshot subsets {list(ids)} do not match {list(self._ids)}")
        self._states = {entry["id"]: self._state_from_dict(entry) for entry in entries}
        self._ids = ids
        self.step_count = int(doc["step"])

    def snapshot(self) -> bytes:
        return serialization.dumps(self.state_dict())

    def restore(self, data: bytes) -> None:
        self.load_state_dict(serialization.loads(data))

    @abstractmethod
    def _init_state(self, subset: ParamSubset) -> Any:
        ...

    @abstractmethod
    def _update(self, subset: ParamSubset, state: Any) -> Tuple[Any, ParamSubset, UpdateReport]:
        ...

    @staticmethod
    def _target_of(state: Any) -> np.ndarray:
        return state

    def _state_to_dict(self, state: Any) -> Dict[str, Any]:
        return {"target": state}

    def _state_from_dict(self, entry: Dict[str, Any]) -> Any:
        return _vector(entry, "target")


def _vector(entry: Dict[str, Any], key: str) -> np.ndarray:
    return np.asarray(entry[key], dtype=np.float64)


def _deviation(main: ParamSubset, target: np.ndarray) -> float:
    return float(np.mean(np.abs(main.values - target)))


class HardTracker(TargetTracker):
    """Copies main into target every `period` steps (the first step copies)"""

    rule = "hard"

    def _init_state(self, subset):
        return subset.values.copy()

    def _update(self, subset, state):
        (target,) = hard_update([subset], self.config.period, self.step_count, [state])
        copied = 1.0 if self.step_count % self.config.period == 0 else 0.0
        report = UpdateReport(
            tau1=copied,
            tau2=copied,
            deviation_mean=_deviation(subset, target),
            subset_id=subset.id,
        )
        return target, subset, report


class SoftTracker(TargetTracker):
    """Exponential moving average of the main parameters"""

    rule = "soft"

    def __init__(self, config: UpdateConfig):
        super().__init__(config)
        self._cfg = config.to_soft()

    def _init_state(self, subset):
        return subset.values.copy()

    def _update(self, subset, state):
        target = soft_update(subset, state, self._cfg.tau)
        report = UpdateReport(
            tau1=self._cfg.tau,
            tau2=self._cfg.tau,
            deviation_mean=_deviation(subset, target),
            subset_id=subset.id,
        )
        return target, subset, report


class TSoftTracker(TargetTracker):
    """Student-t weighted moving average with fixed degrees of freedom"""

    rule = "tsoft"

    def _init_state(self, subset):
        return tsoft_init(subset, self.config.tau, self.config.epsilon)

    def _update(self, subset, state):
        new_state, report = tsoft_update(subset, state, self.config.tau, self.config.nu)
        return new_state, subset, report

    @staticmethod
    def _target_of(state: TSoftState) -> np.ndarray:
        return state.target

    def _state_to_dict(self, state):
        return {"target": state.target, "sigma_sq": float(state.sigma_sq), "W": float(state.W)}

    def _state_from_dict(self, entry):
        return TSoftState(target=_vector(entry, "target"), sigma_sq=float(entry["sigma_sq"]), W=float(entry["W"]))


class ATSoftTracker(TargetTracker):
    """
    Adaptive T-soft tracker; consolidates the main subsets for CAT-soft

    The main subsets returned by `step` must be written back into the main
    network when consolidation is enabled.
    """

    rule = "atsoft"

    def __init__(self, config: UpdateConfig):
        self.rule = config.rule if config.rule in ("atsoft", "catsoft") else self.rule
        super().__init__(config)
        self._cfg = config.to_atsoft()

    def _init_state(self, subset):
        return atsoft_init(subset, self._cfg)

    def _update(self, subset, state):
        return catsoft_step(subset, state, self._cfg)

    @staticmethod
    def _target_of(state: ATSoftState) -> np.ndarray:
        return state.target

    def _state_to_dict(self, state):
        return {"target": state.target, "sigma_sq": state.sigma_sq, "nu_tilde": float(state.nu_tilde)}

    def _state_from_dict(self, entry):
        nu_tilde = float(entry["nu_tilde"])
        if not (math.isfinite(nu_tilde) and nu_tilde > 0.0):
            raise ConfigError("nu_tilde", f"must be positive, got {nu_tilde}")
        return ATSoftState(
            target=_vector(entry, "target"),
            sigma_sq=_vector(entry, "sigma_sq"),
            nu_tilde=nu_tilde,
        )


_TRACKERS = {
    "hard": HardTracker,
    "soft": SoftTracker,
    "tsoft": TSoftTracker,
    "atsoft": ATSoftTracker,
    "catsoft": ATSoftTracker,
}


def build_tracker(config: UpdateConfig) -> TargetTracker:
    """Instantiate the tracker class for `config.rule`"""
    return _TRACKERS[config.rule](config)
