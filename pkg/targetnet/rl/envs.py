"""
Toy continuous-control environments

point_mass
    State (x, v), dt = 0.05: x' = x + dt v, v' = v + dt a, reward
    -(x^2 + 0.1 a^2) on the pre-step x and the clipped action a in [-1, 1].
    Terminal when |x'| > x_limit or after max_steps steps. Observation is
    (x, v) plus noise; reset draws x uniformly in [-init_range, init_range]
    with v = 0.

pendulum
    Rigid pendulum swing-up, angle measured from upright. Torque u in
    [-max_torque, max_torque]; thdot' = thdot + (3 g / (2 l) sin th +
    3 / (m l^2) u) dt clipped to +-max_speed, th' = th + thdot' dt; reward
    -(normalize(th)^2 + 0.1 thdot^2 + 0.001 u^2). Observation is
    (cos th, sin th, thdot) plus noise; terminal only after max_steps.
    Reset draws th in [-pi, pi] and thdot in [-1, 1].

Observations carry i.i.d. Gaussian noise with std `obs_noise_std`.
"""

import math
from dataclasses import asdict, dataclass
from typing import Any, Dict, Tuple

import numpy as np

from ..core.errors import ConfigError, NumericError, ShapeError

ENVIRONMENTS = ("point_mass", "pendulum")

_OBS_DIMS = {"point_mass": 2, "pendulum": 3}


@dataclass(frozen=True)
class EnvSpec:
    """Environment selection and dynamics parameters"""
    name: str = "point_mass"
    obs_noise_std: float = 0.001
    max_steps: int = 100
    dt: float = 0.05
    action_bound: float = 1.0
    init_range: float = 1.0
    x_limit: float = 10.0
    gravity: float = 9.81
    mass: float = 1.0
    length: float = 1.0
    max_speed: float = 8.0

    def __post_init__(self):
        if self.name not in ENVIRONMENTS:
            raise ConfigError("env", f"must be one of {', '.join(ENVIRONMENTS)}, got {self.name!r}")
        if isinstance(self.max_steps, bool) or not isinstance(self.max_steps, (int, np.integer)) or self.max_steps < 1:
            raise ConfigError("max_steps", f"must be a positive integer, got {self.max_steps!r}")
        if not (math.isfinite(self.obs_noise_std) and self.obs_noise_std >= 0.0):
            raise ConfigError("obs_noise_std", f"must be non-negative, got {self.obs_noise_std!r}")
        if not self.init_range >= 0.0:
            raise ConfigError("init_range", f"must be non-negative, got {self.init_range!r}")
        for name in ("dt", "action_bound", "x_limit", "gravity", "mass", "length", "max_speed"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise ConfigError(name, f"must be positive, got {value!r}")

    @classmethod
    def pendulum(cls, **overrides: Any) -> "EnvSpec":
        params = {"name": "pendulum", "max_steps": 200, "action_bound": 2.0}
        params.update(overrides)
        return cls(**params)

    @property
    def obs_dim(self) -> int:
        return _OBS_DIMS[self.name]

    @property
    def act_dim(self) -> int:
        return 1

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class EnvState:
    """Physical state plus the number of steps taken in the episode"""
    x: np.ndarray
    t: int = 0


def _observe(spec: EnvSpec, x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    clean = np.array([np.cos(x[0]), np.sin(x[0]), x[1]]) if spec.name == "pendulum" else x.copy()
    return clean + spec.obs_noise_std * rng.standard_normal(spec.obs_dim)


def reset(spec: EnvSpec, rng: np.random.Generator) -> Tuple[EnvState, np.ndarray]:
    """Initial state and its noisy observation"""
    if spec.name == "pendulum":
        x = np.array([rng.uniform(-np.pi, np.pi), rng.uniform(-1.0, 1.0)])
    else:
        x = np.array([rng.uniform(-spec.init_range, spec.init_range), 0.0])
    return EnvState(x), _observe(spec, x, rng)


def _angle_normalize(th: float) -> float:
    return ((th + np.pi) % (2.0 * np.pi)) - np.pi


def env_step(
    spec: EnvSpec,
    state: EnvState,
    action: np.ndarray,
    rng: np.random.Generator,
) -> Tuple[EnvState, np.ndarray, float, bool]:
    """
    Advance one step

    Returns:
        (next state, noisy observation of it, reward, terminal)
    """
    action = np.asarray(action, dtype=np.float64).reshape(-1)
    if action.shape != (spec.act_dim,):
        raise ShapeError(f"{spec.name} expects {spec.act_dim} action values, got {action.shape}")
    if not np.all(np.isfinite(action)):
        raise NumericError(f"non-finite action {action.tolist()}")
    a = float(np.clip(action[0], -spec.action_bound, spec.action_bound))
    t = state.t + 1

    if spec.name == "pendulum":
        th, thdot = state.x
        reward = -(_angle_normalize(th) ** 2 + 0.1 * thdot ** 2 + 0.001 * a ** 2)
        g, m, l, dt = spec.gravity, spec.mass, spec.length, spec.dt
        thdot = float(np.clip(thdot + (3.0 * g / (2.0 * l) * np.sin(th) + 3.0 / (m * l * l) * a) * dt,
                              -spec.max_speed, spec.max_speed))
        x = np.array([th + thdot * dt, thdot])
        terminal = t >= spec.max_steps
    else:
        pos, vel = state.x
        reward = -(pos * pos + 0.1 * a * a)
        x = np.array([pos + spec.dt * vel, vel + spec.dt * a])
        terminal = abs(x[0]) > spec.x_limit or t >= spec.max_steps

    next_state = EnvState(x, t)
    return next_state, _observe(spec, x, rng), float(reward), bool(terminal)
