"""
Core target-network update rules and trackers
"""

from .errors import (
    ArgumentError,
    ConfigError,
    ContractError,
    DivergenceError,
    NumericError,
    ShapeError,
    TargetNetError,
)
from .params import ParamSubset
from .trackers import (
    RULES,
    ATSoftTracker,
    HardTracker,
    SoftTracker,
    TargetTracker,
    TrackerStep,
    TSoftTracker,
    UpdateConfig,
    build_tracker,
)
from .updates import (
    W2_BOUND,
    ATSoftConfig,
    ATSoftState,
    SoftConfig,
    TSoftState,
    UpdateReport,
    atsoft_apply,
    atsoft_init,
    atsoft_statistics,
    atsoft_update_amounts,
    catsoft_step,
    consolidate,
    hard_update,
    quantile_threshold,
    soft_update,
    tsoft_init,
    tsoft_update,
)

__all__ = [
    "ArgumentError", "ConfigError", "ContractError", "DivergenceError", "NumericError",
    "ShapeError", "TargetNetError", "ParamSubset", "RULES", "ATSoftTracker", "HardTracker",
    "SoftTracker", "TargetTracker", "TrackerStep", "TSoftTracker", "UpdateConfig",
    "build_tracker", "W2_BOUND", "ATSoftConfig", "ATSoftState", "SoftConfig", "TSoftState",
    "UpdateReport", "atsoft_apply", "atsoft_init", "atsoft_statistics", "atsoft_update_amounts",
    "catsoft_step", "consolidate", "hard_update", "quantile_threshold", "soft_update",
    "tsoft_init", "tsoft_update",
]
