"""
Gaussian policy head

The mean comes from an Mlp; the log standard deviation is a
state-independent parameter vector registered as its own subset.
"""

from typing import List, Optional, Sequence

import numpy as np

from ..core.errors import ShapeError
from ..core.params import ParamSubset
from ..utils import serialization
from .mlp import PARAMS_FORMAT, Gradients, Mlp, check_gradient_keys

LOG_STD_ID = "log_std"

# Range kept by sgd_step; the lower end bounds 1/sigma in the score function.
LOG_STD_MIN = -2.0
LOG_STD_MAX = 1.0

_LOG_2PI = float(np.log(2.0 * np.pi))


class GaussianPolicy:
    """
    Diagonal Gaussian policy pi(a|s) = N(mu(s), exp(log_std)^2)

    The mean network's output layer starts at zero and log_std at zero, so a
    fresh policy acts with mean 0 and unit standard deviation.
    """

    def __init__(
        self,
        obs_dim: int,
        act_dim: int,
        hidden: Sequence[int] = (32, 32),
        rng: Optional[np.random.Generator] = None,
        name: str = "policy",
    ):
        self.net = Mlp((obs_dim, *hidden, act_dim), rng=rng, name=name, zero_output=True)
        self.log_std = np.zeros(act_dim)
        self.name = name

    @property
    def obs_dim(self) -> int:
        return self.net.sizes[0]

    @property
    def act_dim(self) -> int:
        return self.net.sizes[-1]

    @property
    def std(self) -> np.ndarray:
        return np.exp(self.log_std)

    @property
    def param_ids(self) -> List[str]:
        return self.net.param_ids + [LOG_STD_ID]

    def mean(self, obs: np.ndarray) -> np.ndarray:
        return self.net.forward(obs)

    def log_prob(self, obs: np.ndarray, action: np.ndarray) -> np.ndarray:
        """Log density of `action`, summed over action dimensions"""
        mu = self.mean(obs)
        action = np.asarray(action, dtype=np.float64)
        if action.shape != mu.shape:
            raise ShapeError(f"action shape {action.shape} does not match mean shape {mu.shape}")
        z = (action - mu) / self.std
        return np.sum(-0.5 * z * z - self.log_std - 0.5 * _LOG_2PI, axis=-1)

    def sample(self, obs: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        mu = self.net.predict(obs)
        return mu + self.std * rng.standard_normal(mu.shape)

    def log_prob_grad(self, obs: np.ndarray, action: np.ndarray, weights: np.ndarray) -> Gradients:
        """
        Gradients of sum_b weights_b * log pi(action_b | obs_b)

        Args:
            obs: observations, shape (batch, obs_dim)
            action: actions, shape (batch, act_dim)
            weights: per-sample coefficients, shape (batch,)
        """
        obs = np.atleast_2d(np.asarray(obs, dtype=np.float64))
        action = np.atleast_2d(np.asarray(action, dtype=np.float64))
        weights = np.asarray(weights, dtype=np.float64).reshape(-1, 1)
        mu = self.mean(obs)
        var = self.std ** 2
        diff = action - mu

        grads = self.net.backward(weights * diff / var)
        grads[LOG_STD_ID] = np.sum(weights * (diff * diff / var - 1.0), axis=0)
        return grads

    def sgd_step(self, grads: Gradients, learning_rate: float) -> "GaussianPolicy":
        """SGD on every subset; log_std is clipped to [LOG_STD_MIN, LOG_STD_MAX]"""
        check_gradient_keys(grads, self.param_ids)
        self.net.sgd_step({k: v for k, v in grads.items() if k != LOG_STD_ID}, learning_rate)
        self.log_std = np.clip(self.log_std - learning_rate * np.asarray(grads[LOG_STD_ID]), LOG_STD_MIN, LOG_STD_MAX)
        return self

    def subsets(self) -> List[ParamSubset]:
        return self.net.subsets() + [ParamSubset(LOG_STD_ID, self.log_std)]

    def assign(self, subsets: Sequence[ParamSubset]) -> "GaussianPolicy":
        rest = []
        for subset in subsets:
            if subset.id == LOG_STD_ID:
                if subset.size != self.log_std.size:
                    raise ShapeError(f"log_std has {subset.size} values, expected {self.log_std.size}")
                self.log_std = subset.values.copy()
            else:
                rest.append(subset)
        if rest:
            self.net.assign(rest)
        return self

    def copy(self) -> "GaussianPolicy":
        clone = GaussianPolicy.__new__(GaussianPolicy)
        clone.net = self.net.copy()
        clone.log_std = self.log_std.copy()
        clone.name = self.name
        return clone

    def max_abs(self):
        value, where = self.net.max_abs()
        log_std_max = float(np.max(np.abs(self.log_std))) if np.all(np.isfinite(self.log_std)) else float("inf")
        return (log_std_max, LOG_STD_ID) if log_std_max > value else (value, where)

    def state_dict(self) -> dict:
        doc = self.net.state_dict()
        doc["subsets"].append({"id": LOG_STD_ID, "shape": [self.log_std.size], "values": self.log_std})
        return doc

    def load_state_dict(self, doc: dict) -> "GaussianPolicy":
        self.net.load_state_dict(doc)
        for entry in doc["subsets"]:
            if entry["id"] == LOG_STD_ID:
                self.assign([ParamSubset(LOG_STD_ID, np.asarray(entry["values"], dtype=np.float64))])
        return self

    @classmethod
    def from_state_dict(cls, doc: dict) -> "GaussianPolicy":
        doc = serialization.check_format(doc, PARAMS_FORMAT)
        sizes = doc["sizes"]
        policy = cls(sizes[0], sizes[-1], hidden=sizes[1:-1], name=doc.get("name", "policy"))
        return policy.load_state_dict(doc)
