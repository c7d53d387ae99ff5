"""
Synthetic main-parameter streams

A stream plays the part of a main network whose parameters follow a known
base trajectory, disturbed by Gaussian noise, sign-symmetric outliers and,
optionally, a fixed set of persistently offset ("sticky") elements.
"""

import math
from dataclasses import asdict, dataclass
from typing import Any, Dict, Iterator, Sequence

import numpy as np

from ..core.errors import ConfigError
from ..core.params import ParamSubset

BASES = ("constant", "step", "ramp", "sinusoid")

# Counter-based generator; recorded alongside every benchmark result.
RNG_ALGORITHM = "numpy.Philox"

STREAM_SUBSET_ID = "theta"


@dataclass(frozen=True)
class StreamSpec:
    """
    Synthetic stream definition

    Base trajectories:
    - constant: `level`
    - step: `level` up to and including step `step_at`, `step_to` after it
    - ramp: `level + slope * t`
    - sinusoid: `level + amplitude * sin(2 pi t / period)`
    """
    dim: int = 100
    horizon: int = 5000
    base: str = "constant"
    level: float = 0.0
    step_at: int = 0
    step_to: float = 1.0
    slope: float = 0.0
    amplitude: float = 1.0
    period: float = 100.0
    noise_std: float = 0.01
    outlier_prob: float = 0.1
    outlier_scale: float = 100.0
    sticky_fraction: float = 0.0
    sticky_offset: float = 0.0
    sticky_start: int = 0
    seed: int = 0

    def __post_init__(self):
        for name in ("dim", "horizon"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 1:
                raise ConfigError(name, f"must be a positive integer, got {value!r}")
        for name in ("step_at", "sticky_start", "seed"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 0:
                raise ConfigError(name, f"must be a non-negative integer, got {value!r}")
        if self.base not in BASES:
            raise ConfigError("base", f"must be one of {', '.join(BASES)}, got {self.base!r}")
        for name in ("noise_std", "outlier_scale"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0.0):
                raise ConfigError(name, f"must be a non-negative finite number, got {value!r}")
        for name in ("outlier_prob", "sticky_fraction"):
            value = getattr(self, name)
            if not (0.0 <= value <= 1.0):
                raise ConfigError(name, f"must be in [0, 1], got {value!r}")
        if not self.period > 0.0:
            raise ConfigError("period", f"must be positive, got {self.period!r}")
        for name in ("level", "step_to", "slope", "amplitude", "sticky_offset"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(name, "must be finite")

    def base_trajectory(self) -> np.ndarray:
        """Noiseless base value for every step, shape (horizon,)"""
        t = np.arange(self.horizon, dtype=np.float64)
        if self.base == "constant":
            return np.full(self.horizon, float(self.level))
        if self.base == "step":
            return np.where(t <= self.step_at, float(self.level), float(self.step_to))
        if self.base == "ramp":
            return self.level + self.slope * t
        return self.level + self.amplitude * np.sin(2.0 * np.pi * t / self.period)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


class SyntheticStream(Sequence[ParamSubset]):
    """
    Materialised stream: one ParamSubset per step

    `values[t]` is the main parameter vector at step t and `base[t]` the
    clean trajectory value it was generated from.
    """

    def __init__(self, spec: StreamSpec, values: np.ndarray, base: np.ndarray, sticky_indices: np.ndarray):
        self.spec = spec
        self.values = values
        self.base = base
        self.sticky_indices = sticky_indices
        self.rng_algorithm = RNG_ALGORITHM

    def __len__(self) -> int:
        return self.values.shape[0]

    def __getitem__(self, t):
        if isinstance(t, slice):
            return [self[i] for i in range(*t.indices(len(self)))]
        return ParamSubset(STREAM_SUBSET_ID, self.values[t])

    def __iter__(self) -> Iterator[ParamSubset]:
        for t in range(len(self)):
            yield self[t]


def generate_stream(spec: StreamSpec) -> SyntheticStream:
    """
    Draw the stream for `spec`

    Draw order is fixed (noise, outlier mask, outlier signs, sticky
    elements) and every draw happens even when its magnitude is zero, so a
    seed gives the same realisation for any choice of scales.
    """
    rng = np.random.Generator(np.random.Philox(spec.seed))
    shape = (spec.horizon, spec.dim)

    noise = rng.standard_normal(shape)
    mask = rng.random(shape) < spec.outlier_prob
    signs = np.where(rng.random(shape) < 0.5, -1.0, 1.0)
    n_sticky = int(round(spec.sticky_fraction * spec.dim))
    sticky_indices = np.sort(rng.choice(spec.dim, size=n_sticky, replace=False))

    base = spec.base_trajectory()
    values = base[:, None] + spec.noise_std * noise + np.where(mask, signs * spec.outlier_scale, 0.0)
    if n_sticky and spec.sticky_start < spec.horizon:
        values[spec.sticky_start:, sticky_indices] += spec.sticky_offset
    return SyntheticStream(spec, values, base, sticky_indices)
