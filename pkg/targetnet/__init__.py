"""
targetnet

Noise-robust target network updates for deep reinforcement learning: hard,
soft, T-soft, adaptive T-soft (AT-soft) and consolidated adaptive T-soft
(CAT-soft) updates, a synthetic tracking benchmark, and a desk-scale
actor-critic harness built on small numpy networks.
"""

__version__ = "0.3.0"
__description__ = "Noise-robust target network update rules"

from .core import (
    ATSoftConfig,
    ParamSubset,
    TargetNetError,
    TargetTracker,
    UpdateConfig,
    UpdateReport,
    build_tracker,
    catsoft_step,
    soft_update,
    tsoft_update,
)

__all__ = [
    "ATSoftConfig",
    "ParamSubset",
    "TargetNetError",
    "TargetTracker",
    "UpdateConfig",
    "UpdateReport",
    "build_tracker",
    "catsoft_step",
    "soft_update",
    "tsoft_update",
]
