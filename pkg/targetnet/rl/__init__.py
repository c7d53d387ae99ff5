"""
Desk-scale actor-critic harness exercising the target update rules
"""

from .envs import ENVIRONMENTS, EnvSpec, EnvState, env_step, reset
from .losses import LossResult, Transition, actor_loss_grad, critic_loss_grad, td_target, td_targets
from .trainer import (
    CURVE_COLUMNS,
    EvalSummary,
    TrainerConfig,
    TrainingResult,
    evaluate,
    random_policy_return,
    train,
)

__all__ = [
    "ENVIRONMENTS", "EnvSpec", "EnvState", "env_step", "reset",
    "LossResult", "Transition", "actor_loss_grad", "critic_loss_grad", "td_target", "td_targets",
    "CURVE_COLUMNS", "EvalSummary", "TrainerConfig", "TrainingResult", "evaluate",
    "random_policy_return", "train",
]
