"""
Actor-critic losses

Critic: 0.5 (y - V(s))^2 with the pseudo-supervised signal
y = r + gamma V(s'; target) computed from the target value network only.
Actor: -(y - V(s)) pi(a|s) / b(a|s), where b is the target policy the
action was sampled from.
"""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..core.errors import ArgumentError
from ..nn.mlp import Gradients, Mlp
from ..nn.policy import GaussianPolicy

RATIO_MIN = 1e-3
RATIO_MAX = 1e3

# Log-density below which a behaviour sample is dropped.
LOG_DENSITY_FLOOR = float(np.log(np.finfo(np.float64).tiny))


@dataclass(frozen=True)
class Transition:
    s: np.ndarray
    a: np.ndarray
    r: float
    s_next: np.ndarray
    terminal: bool


@dataclass(frozen=True)
class LossResult:
    loss: float
    grads: Gradients
    skipped: int = 0
    td_errors: Optional[np.ndarray] = None


def _stack(batch: Sequence[Transition]):
    if len(batch) == 0:
        raise ArgumentError("empty batch")
    s = np.stack([np.asarray(tr.s, dtype=np.float64) for tr in batch])
    a = np.stack([np.asarray(tr.a, dtype=np.float64).reshape(-1) for tr in batch])
    r = np.array([tr.r for tr in batch], dtype=np.float64)
    s_next = np.stack([np.asarray(tr.s_next, dtype=np.float64) for tr in batch])
    terminal = np.array([tr.terminal for tr in batch], dtype=bool)
    return s, a, r, s_next, terminal


def td_target(r, v_next_target, gamma: float, terminal):
    """y = r + gamma V(s'; target), or y = r at terminal steps"""
    return np.where(terminal, r, r + gamma * np.asarray(v_next_target))


def td_targets(batch: Sequence[Transition], target_value_net: Mlp, gamma: float) -> np.ndarray:
    """Pseudo-supervised signals of a batch, from the target value network"""
    _, _, r, s_next, terminal = _stack(batch)
    v_next = target_value_net.predict(s_next)[:, 0]
    return td_target(r, v_next, gamma, terminal)


def critic_loss_grad(batch: Sequence[Transition], value_net: Mlp, y: np.ndarray) -> LossResult:
    """Mean of 0.5 (y - V(s))^2 over the batch; y is a constant. Carries y - V(s) as td_errors"""
    s, _, _, _, _ = _stack(batch)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    v = value_net.forward(s)[:, 0]
    err = y - v
    n = len(batch)
    grads = value_net.backward((-err / n)[:, None])
    return LossResult(float(0.5 * np.mean(err * err)), grads, td_errors=err)


def actor_loss_grad(
    batch: Sequence[Transition],
    policy: GaussianPolicy,
    target_policy: GaussianPolicy,
    value_net: Mlp,
    y: np.ndarray,
    advantage_scale: float = 1.0,
) -> LossResult:
    """
    Likelihood-ratio policy loss and its gradient

    The advantage y - V(s) is divided by `advantage_scale` in both the loss
    and the gradient.

    The ratio pi / b is clipped to [RATIO_MIN, RATIO_MAX] with zero gradient
    outside that range. Samples whose behaviour density underflows are left
    out and counted in `skipped`.
    """
    s, a, _, _, _ = _stack(batch)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if not (np.isfinite(advantage_scale) and advantage_scale > 0.0):
        raise ArgumentError(f"advantage_scale must be positive, got {advantage_scale!r}")
    advantage = (y - value_net.predict(s)[:, 0]) / advantage_scale

    log_b = target_policy.log_prob(s, a)
    valid = log_b >= LOG_DENSITY_FLOOR
    skipped = int(np.count_nonzero(~valid))
    n = int(np.count_nonzero(valid))
    if n == 0:
        zeros = {pid: np.zeros(sub.size) for pid, sub in zip(policy.param_ids, policy.subsets())}
        return LossResult(0.0, zeros, skipped)

    log_pi = policy.log_prob(s, a)
    ratio = np.exp(np.clip(log_pi - log_b, -700.0, 700.0))
    clipped = np.clip(ratio, RATIO_MIN, RATIO_MAX)
    inside = (ratio >= RATIO_MIN) & (ratio <= RATIO_MAX)

    loss = -float(np.sum(np.where(valid, advantage * clipped, 0.0)) / n)
    weights = np.where(valid & inside, -advantage * ratio / n, 0.0)
    return LossResult(loss, policy.log_prob_grad(s, a, weights), skipped)
