"""
Run configuration for targetnet

Flat YAML files, environment overrides and command-line flags resolved into
one validated RunConfig. Precedence, lowest first: built-in defaults, config
file, environment variables, flags.
"""

import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple

import yaml

from ..bench.streams import StreamSpec
from ..core.errors import ConfigError
from ..core.trackers import RULES, UpdateConfig
from ..rl.envs import EnvSpec
from ..rl.trainer import TrainerConfig
from .logging import LEVELS

COMMANDS = ("synth", "compare", "train", "evaluate")

DEFAULT_COMPARE_RULES = ("soft", "tsoft", "atsoft", "catsoft")

CONFIG_PATH_ENV = "TARGETNET_CONFIG_PATH"

# Environment variable -> configuration key
ENV_MAPPINGS = {
    "TARGETNET_LOG_LEVEL": "log_level",
    "TARGETNET_OUT_DIR": "out_dir",
}

# Configuration keys that are spelled differently on the dataclasses
KEY_ALIASES = {"lambda": "lambda_c"}
_STREAM_FIELDS = {"sine_period": "period"}


@dataclass(frozen=True)
class RunConfig:
    """
    Fully resolved configuration of one command-line run

    Rule fields default to the published method settings (tau=0.1, nu=1,
    nu_lower=1, lambda=1, q=1); stream fields default to the canonical
    outlier stream; environment and trainer fields to the desk-scale setup.
    """
    command: str = "synth"
    # update rule
    rule: str = "catsoft"
    tau: float = 0.1
    period: int = 1
    nu: float = 1.0
    nu_lower: float = 1.0
    epsilon: float = 1e-5
    lambda_c: float = 1.0
    q: float = 1.0
    consolidate: bool = False
    rules: Tuple[str, ...] = DEFAULT_COMPARE_RULES
    # synthetic stream
    dim: int = 100
    horizon: int = 5000
    base: str = "constant"
    level: float = 0.0
    step_at: int = 0
    step_to: float = 1.0
    slope: float = 0.0
    amplitude: float = 1.0
    sine_period: float = 100.0
    noise_std: float = 0.01
    outlier_prob: float = 0.1
    outlier_scale: float = 100.0
    sticky_fraction: float = 0.0
    sticky_offset: float = 0.0
    sticky_start: int = 0
    # environment and trainer
    env: str = "point_mass"
    obs_noise_std: float = 0.001
    max_steps: Optional[int] = None
    init_range: float = 1.0
    gamma: float = 0.99
    learning_rate: float = 1e-3
    episodes: int = 300
    hidden: Tuple[int, ...] = (32, 32)
    eval_episodes: int = 100
    # run
    seeds: Tuple[int, ...] = (0,)
    out_dir: str = "runs"
    log_level: str = "INFO"
    log_format: str = "console"
    checkpoint: Optional[str] = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError("command", f"must be one of {', '.join(COMMANDS)}, got {self.command!r}")
        object.__setattr__(self, "rules", tuple(self.rules))
        object.__setattr__(self, "hidden", tuple(self.hidden))
        object.__setattr__(self, "seeds", tuple(self.seeds))
        if not self.seeds:
            raise ConfigError("seeds", "at least one seed is required")
        for seed in self.seeds:
            if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
                raise ConfigError("seeds", f"must be non-negative integers, got {seed!r}")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError("seeds", f"contains duplicates: {list(self.seeds)}")
        if not self.rules:
            raise ConfigError("rules", "at least one rule is required")
        for rule in self.rules:
            if rule not in RULES:
                raise ConfigError("rules", f"entries must be one of {', '.join(RULES)}, got {rule!r}")
        if str(self.log_level).upper() not in LEVELS:
            raise ConfigError("log_level", f"must be one of {', '.join(LEVELS)}, got {self.log_level!r}")
        object.__setattr__(self, "log_level", str(self.log_level).upper())
        if self.log_format not in ("console", "json"):
            raise ConfigError("log_format", f"must be console or json, got {self.log_format!r}")
        if not str(self.out_dir):
            raise ConfigError("out_dir", "must not be empty")

        # Build every section once so range errors surface at parse time.
        for rule in {self.rule, *self.rules}:
            self.update_config(rule)
        self.stream_spec(self.seeds[0])
        self.trainer_config(self.seeds[0])
        self.env_spec()

    def update_config(self, rule: Optional[str] = None) -> UpdateConfig:
        return UpdateConfig(
            rule=rule or self.rule,
            tau=self.tau,
            period=self.period,
            nu=self.nu,
            nu_lower=self.nu_lower,
            epsilon=self.epsilon,
            lambda_c=self.lambda_c,
            q=self.q,
            consolidate=self.consolidate,
        )

    def rule_configs(self) -> Tuple[UpdateConfig, ...]:
        """Rules run by the current command: the compare list, or the single rule"""
        names = self.rules if self.command == "compare" else (self.rule,)
        return tuple(self.update_config(name) for name in names)

    def stream_spec(self, seed: int) -> StreamSpec:
        params = {name: getattr(self, name) for name in (
            "dim", "horizon", "base", "level", "step_at", "step_to", "slope", "amplitude",
            "noise_std", "outlier_prob", "outlier_scale", "sticky_fraction", "sticky_offset", "sticky_start",
        )}
        try:
            return StreamSpec(period=self.sine_period, seed=seed, **params)
        except ConfigError as e:
            if e.field in _STREAM_FIELDS.values():
                raise ConfigError("sine_period", str(e).split(": ", 1)[1]) from e
            raise

    def env_spec(self) -> EnvSpec:
        params = {"obs_noise_std": self.obs_noise_std, "init_range": self.init_range}
        if self.max_steps is not None:
            params["max_steps"] = self.max_steps
        if self.env == "pendulum":
            return EnvSpec.pendulum(**params)
        return EnvSpec(name=self.env, **params)

    def trainer_config(self, seed: int) -> TrainerConfig:
        return TrainerConfig(
            gamma=self.gamma,
            learning_rate=self.learning_rate,
            episodes=self.episodes,
            hidden=self.hidden,
            value_rule=self.update_config(),
            eval_episodes=self.eval_episodes,
            seed=seed,
        )

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        for key in ("rules", "hidden", "seeds"):
            data[key] = list(data[key])
        return data


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}
_INT_KEYS = {"period", "dim", "horizon", "step_at", "sticky_start", "max_steps", "episodes", "eval_episodes"}
_BOOL_KEYS = {"consolidate"}
_LIST_INT_KEYS = {"hidden", "seeds"}
_LIST_STR_KEYS = {"rules"}
_STR_KEYS = {"command", "rule", "base", "env", "out_dir", "log_level", "log_format", "checkpoint"}


def _normalize_key(key: str) -> str:
    key = str(key).strip().replace("-", "_")
    return KEY_ALIASES.get(key, key)


def convert_value(key: str, value: Any) -> Any:
    """Coerce a text value (environment variable, flag) to the key's type"""
    if not isinstance(value, str):
        if key in _LIST_INT_KEYS | _LIST_STR_KEYS and isinstance(value, (list, tuple)):
            return tuple(value)
        return value
    text = value.strip()
    try:
        if key in _INT_KEYS:
            return int(text)
        if key in _BOOL_KEYS:
            if text.lower() in ("true", "1", "yes", "on"):
                return True
            if text.lower() in ("false", "0", "no", "off"):
                return False
            raise ValueError(text)
        if key in _LIST_INT_KEYS:
            return tuple(int(item) for item in text.split(",") if item.strip())
        if key in _LIST_STR_KEYS:
            return tuple(item.strip() for item in text.split(",") if item.strip())
        if key in _STR_KEYS:
            return text
        return float(text)
    except ValueError:
        raise ConfigError(key, f"cannot parse {value!r}") from None


def load_config_text(text: str) -> Dict[str, Any]:
    """Parse a flat YAML mapping, rejecting unknown keys"""
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigError("config", f"invalid YAML: {e}") from e
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError("config", "must be a mapping of key: value pairs")

    resolved: Dict[str, Any] = {}
    for raw_key, value in data.items():
        key = _normalize_key(raw_key)
        if key not in _FIELD_TYPES or key == "command":
            raise ConfigError(str(raw_key), "unknown configuration key")
        if isinstance(value, dict):
            raise ConfigError(key, "nested sections are not supported; use flat keys")
        resolved[key] = convert_value(key, value)
    return resolved


def load_config_file(path: str) -> Dict[str, Any]:
    config_path = Path(path)
    if not config_path.is_file():
        raise ConfigError("config", f"file not found: {path}")
    return load_config_text(config_path.read_text())


def load_env_overrides(environ: Optional[Mapping[str, str]] = None) -> Dict[str, Any]:
    """Configuration overrides from TARGETNET_* environment variables"""
    environ = os.environ if environ is None else environ
    overrides = {}
    for env_var, key in ENV_MAPPINGS.items():
        value = environ.get(env_var)
        if value:
            overrides[key] = convert_value(key, value)
    return overrides


def parse_config(
    command: str,
    config_path: Optional[str] = None,
    overrides: Optional[Mapping[str, Any]] = None,
    config_text: Optional[str] = None,
    environ: Optional[Mapping[str, str]] = None,
) -> RunConfig:
    """
    Resolve the run configuration

    Args:
        command: one of synth, compare, train, evaluate
        config_path: YAML file; falls back to $TARGETNET_CONFIG_PATH
        overrides: flag values (None entries are ignored)
        config_text: YAML text used instead of a file
        environ: environment mapping (defaults to os.environ)

    Returns:
        Validated RunConfig
    """
    environ = os.environ if environ is None else environ
    data: Dict[str, Any] = {}

    config_path = config_path or environ.get(CONFIG_PATH_ENV)
    if config_text is not None:
        data.update(load_config_text(config_text))
    elif config_path:
        data.update(load_config_file(config_path))

    data.update(load_env_overrides(environ))

    for raw_key, value in (overrides or {}).items():
        if value is None:
            continue
        key = _normalize_key(raw_key)
        if key not in _FIELD_TYPES or key == "command":
            raise ConfigError(str(raw_key), "unknown configuration key")
        data[key] = convert_value(key, value)

    return RunConfig(command=command, **data)


def write_resolved_config(cfg: RunConfig, out_dir: Path) -> Path:
    """Write the resolved configuration next to the run outputs"""
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "resolved_config.yaml"
    path.write_text(yaml.safe_dump(cfg.to_dict(), sort_keys=True))
    return path
