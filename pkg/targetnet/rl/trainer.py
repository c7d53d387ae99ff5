"""
Actor-critic trainer with target networks

On-policy, one transition per update: act with the target policy, take one
critic and one actor SGD step, then run the configured update rule on both
the value and the policy target. With consolidation the trackers' main
subsets are written back into the main networks.

The critic learns on rewards multiplied by `reward_scale`. The actor sees the
advantage divided by a bias-corrected running RMS of the TD errors, and its
gradient is clipped to `max_grad_norm` before the SGD step.
"""

import math
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from ..core.errors import ConfigError, DivergenceError, NumericError
from ..core.trackers import UpdateConfig, build_tracker
from ..nn.mlp import Mlp, clip_grad_norm
from ..nn.policy import GaussianPolicy
from ..utils.logging import get_logger
from .envs import EnvSpec, env_step, reset
from .losses import Transition, actor_loss_grad, critic_loss_grad, td_targets

CURVE_COLUMNS = ("episode", "return", "mean_deviation_V", "mean_deviation_pi", "mean_robustness", "divergence_flag")

UPDATE_LOG_COLUMNS = (
    "step", "episode", "network", "deviation_mean", "robustness", "tau1", "tau2", "tau_c", "nu_tilde", "consolidated",
)

logger = get_logger("trainer")


@dataclass(frozen=True)
class TrainerConfig:
    """
    Training hyperparameters

    `policy_rule` defaults to `value_rule` when not given. `max_grad_norm`
    bounds the actor step only; math.inf disables clipping.
    """
    gamma: float = 0.99
    learning_rate: float = 1e-3
    episodes: int = 300
    hidden: Tuple[int, ...] = (32, 32)
    value_rule: UpdateConfig = field(default_factory=UpdateConfig)
    policy_rule: Optional[UpdateConfig] = None
    eval_episodes: int = 100
    seed: int = 0
    divergence_limit: float = 1e6
    reward_scale: float = 0.1
    advantage_decay: float = 0.999
    max_grad_norm: float = 1.0

    def __post_init__(self):
        if not (0.0 <= self.gamma < 1.0):
            raise ConfigError("gamma", f"must be in [0, 1), got {self.gamma!r}")
        if not (math.isfinite(self.learning_rate) and self.learning_rate >= 0.0):
            raise ConfigError("learning_rate", f"must be non-negative, got {self.learning_rate!r}")
        for name in ("episodes", "eval_episodes", "seed"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 0:
                raise ConfigError(name, f"must be a non-negative integer, got {value!r}")
        if not self.hidden or any(int(h) < 1 for h in self.hidden):
            raise ConfigError("hidden", f"must list positive layer widths, got {self.hidden!r}")
        if not self.divergence_limit > 0.0:
            raise ConfigError("divergence_limit", "must be positive")
        if not (math.isfinite(self.reward_scale) and self.reward_scale > 0.0):
            raise ConfigError("reward_scale", f"must be positive, got {self.reward_scale!r}")
        if not (0.0 <= self.advantage_decay < 1.0):
            raise ConfigError("advantage_decay", f"must be in [0, 1), got {self.advantage_decay!r}")
        if not self.max_grad_norm > 0.0:
            raise ConfigError("max_grad_norm", f"must be positive, got {self.max_grad_norm!r}")
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))
        if self.policy_rule is None:
            object.__setattr__(self, "policy_rule", self.value_rule)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class TrainingResult:
    """Learning curve, final networks and per-step update diagnostics"""
    curve: pd.DataFrame
    value_net: Mlp
    policy: GaussianPolicy
    target_value_net: Mlp
    target_policy: GaussianPolicy
    update_log: pd.DataFrame = field(repr=False)
    diverged: bool = False
    divergence_step: Optional[int] = None
    skipped_samples: int = 0


@dataclass(frozen=True)
class EvalSummary:
    """Evaluation returns: mean and population std over episodes"""
    mean: float
    std: float
    episodes: int
    returns: Tuple[float, ...] = ()
    policy: str = "trained"

    def to_dict(self) -> Dict[str, Any]:
        return {"mean": self.mean, "std": self.std, "episodes": self.episodes,
                "returns": list(self.returns), "policy": self.policy}


class AdvantageScale:
    """Bias-corrected exponential moving RMS of TD errors, floored at `floor`"""

    def __init__(self, decay: float, floor: float = 1e-4):
        self.decay = decay
        self.floor = floor
        self.mean_sq = 0.0
        self.count = 0

    def update(self, errors: np.ndarray) -> float:
        """Fold in one batch of TD errors and return the current scale"""
        self.count += 1
        self.mean_sq = self.decay * self.mean_sq + (1.0 - self.decay) * float(np.mean(np.square(errors)))
        corrected = self.mean_sq / (1.0 - self.decay ** self.count)
        return max(math.sqrt(corrected), self.floor)


def _rngs(seed: int) -> List[np.random.Generator]:
    """Independent generators for initialisation, environment and action noise"""
    return [np.random.Generator(np.random.Philox(s)) for s in np.random.SeedSequence(seed).spawn(3)]


def _check_divergence(step: int, limit: float, *nets) -> None:
    for net in nets:
        magnitude, where = net.max_abs()
        if not magnitude <= limit:
            raise DivergenceError(step, magnitude, limit, subset_id=f"{net.name}.{where}")


def train(cfg: TrainerConfig, spec: EnvSpec) -> TrainingResult:
    """
    Train a value network and a Gaussian policy on `spec`

    A DivergenceError inside the loop stops training; the partial curve is
    returned with `diverged` set and the last row flagged.
    """
    init_rng, env_rng, act_rng = _rngs(cfg.seed)
    value_net = Mlp((spec.obs_dim, *cfg.hidden, 1), rng=init_rng, name="value")
    policy = GaussianPolicy(spec.obs_dim, spec.act_dim, hidden=cfg.hidden, rng=init_rng)
    target_value, target_policy = value_net.copy(), policy.copy()

    v_tracker, p_tracker = build_tracker(cfg.value_rule), build_tracker(cfg.policy_rule)
    v_tracker.reset(value_net.subsets())
    p_tracker.reset(policy.subsets())
    advantage_scale = AdvantageScale(cfg.advantage_decay)

    logger.info("training_started", env=spec.name, episodes=cfg.episodes, seed=cfg.seed,
                value_rule=cfg.value_rule.rule, policy_rule=cfg.policy_rule.rule)

    curve: List[Dict[str, float]] = []
    update_log: List[Dict[str, Any]] = []
    step, skipped = 0, 0
    diverged, divergence_step = False, None

    for episode in range(cfg.episodes):
        state, obs = reset(spec, env_rng)
        episode_return, dev_v, dev_pi, robust = 0.0, [], [], []
        try:
            terminal = False
            while not terminal:
                action = target_policy.sample(obs, act_rng)
                state, next_obs, reward, terminal = env_step(spec, state, action, env_rng)
                batch = [Transition(obs, action, cfg.reward_scale * reward, next_obs, terminal)]
                episode_return += reward

                y = td_targets(batch, target_value, cfg.gamma)
                critic = critic_loss_grad(batch, value_net, y)
                scale = advantage_scale.update(critic.td_errors)
                actor = actor_loss_grad(batch, policy, target_policy, value_net, y, advantage_scale=scale)
                skipped += actor.skipped
                actor_grads, _ = clip_grad_norm(actor.grads, cfg.max_grad_norm)
                value_net.sgd_step(critic.grads, cfg.learning_rate)
                policy.sgd_step(actor_grads, cfg.learning_rate)
                _check_divergence(step, cfg.divergence_limit, value_net, policy)

                v_step = v_tracker.step(value_net.subsets())
                p_step = p_tracker.step(policy.subsets())
                if cfg.value_rule.consolidation_enabled:
                    value_net.assign(v_step.main)
                if cfg.policy_rule.consolidation_enabled:
                    policy.assign(p_step.main)
                target_value.assign(v_tracker.target_subsets())
                target_policy.assign(p_tracker.target_subsets())

                for network, result in (("V", v_step), ("pi", p_step)):
                    row = result.summary()
                    row.update(step=step, episode=episode, network=network)
                    update_log.append(row)
                dev_v.append(v_step.deviation_mean)
                dev_pi.append(p_step.deviation_mean)
                robust.append(0.5 * (v_step.robustness + p_step.robustness))
                obs = next_obs
                step += 1
        except (DivergenceError, NumericError) as e:
            diverged, divergence_step = True, step
            logger.warning("training_diverged", episode=episode, step=step, error=str(e))

        curve.append({
            "episode": episode,
            "return": episode_return,
            "mean_deviation_V": float(np.mean(dev_v)) if dev_v else 0.0,
            "mean_deviation_pi": float(np.mean(dev_pi)) if dev_pi else 0.0,
            "mean_robustness": float(np.mean(robust)) if robust else 0.0,
            "divergence_flag": int(diverged),
        })
        logger.debug("episode_finished", episode=episode, episode_return=episode_return, steps=step)
        if diverged:
            break

    logger.info("training_finished", episodes=len(curve), steps=step, diverged=diverged,
                skipped_samples=skipped)
    return TrainingResult(
        curve=pd.DataFrame(curve, columns=list(CURVE_COLUMNS)),
        value_net=value_net,
        policy=policy,
        target_value_net=target_value,
        target_policy=target_policy,
        update_log=pd.DataFrame(update_log, columns=list(UPDATE_LOG_COLUMNS)),
        diverged=diverged,
        divergence_step=divergence_step,
        skipped_samples=skipped,
    )


def _rollouts(spec: EnvSpec, episodes: int, seed: int, act) -> Tuple[float, ...]:
    rng = np.random.Generator(np.random.Philox(seed))
    returns = []
    for _ in range(episodes):
        state, obs = reset(spec, rng)
        total, terminal = 0.0, False
        while not terminal:
            state, obs, reward, terminal = env_step(spec, state, act(obs, rng), rng)
            total += reward
        returns.append(total)
    return tuple(returns)


def _summarize(returns: Sequence[float], label: str) -> EvalSummary:
    values = np.asarray(returns, dtype=np.float64)
    mean = float(values.mean()) if values.size else 0.0
    std = float(values.std()) if values.size else 0.0
    return EvalSummary(mean=mean, std=std, episodes=len(values), returns=tuple(returns), policy=label)


def evaluate(policy: GaussianPolicy, spec: EnvSpec, episodes: int, seed: int = 0) -> EvalSummary:
    """Roll out the mean action of `policy`; score is the undiscounted episode return"""
    if episodes < 1:
        raise ConfigError("eval_episodes", f"must be positive, got {episodes!r}")
    returns = _rollouts(spec, episodes, seed, lambda obs, rng: policy.net.predict(obs))
    summary = _summarize(returns, "trained")
    logger.info("evaluation_finished", episodes=episodes, mean=summary.mean, std=summary.std)
    return summary


def random_policy_return(spec: EnvSpec, episodes: int, seed: int = 0) -> EvalSummary:
    """Baseline: actions drawn uniformly within the action bound"""
    if episodes < 1:
        raise ConfigError("eval_episodes", f"must be positive, got {episodes!r}")
    bound = spec.action_bound
    returns = _rollouts(spec, episodes, seed, lambda obs, rng: rng.uniform(-bound, bound, size=spec.act_dim))
    return _summarize(returns, "random")
