"""
Multilayer perceptron with manual backpropagation

tanh hidden layers, affine output, plain SGD. Every weight matrix and every
bias vector is registered as one ParamSubset so that the target update rules
can track the network subset by subset.
"""

from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..core.errors import ArgumentError, ConfigError, ContractError, NumericError, ShapeError
from ..core.params import ParamSubset
from ..utils import serialization

PARAMS_FORMAT = "targetnet.params/1"

Gradients = Dict[str, np.ndarray]


class Mlp:
    """
    Fully connected network: input -> tanh hidden layers -> affine output

    Features:
    - Batched or single-vector inputs
    - Exact reverse-mode gradients of output . upstream
    - Subset registry ("l{k}.weight", "l{k}.bias") bridging to the trackers
    - Checkpoints in the shared params document format
    """

    def __init__(
        self,
        sizes: Sequence[int],
        rng: Optional[np.random.Generator] = None,
        name: str = "mlp",
        zero_output: bool = False,
    ):
        sizes = tuple(int(s) for s in sizes)
        if len(sizes) < 2 or any(s < 1 for s in sizes):
            raise ConfigError("sizes", f"need at least input and output sizes, all positive, got {sizes}")
        self.sizes = sizes
        self.name = name
        rng = rng if rng is not None else np.random.default_rng(0)

        self.weights: List[np.ndarray] = []
        self.biases: List[np.ndarray] = []
        for k, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:])):
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            w = rng.uniform(-limit, limit, size=(fan_in, fan_out))
            if zero_output and k == len(sizes) - 2:
                w = np.zeros((fan_in, fan_out))
            self.weights.append(w)
            self.biases.append(np.zeros(fan_out))

        self._version = 0
        self._cache: Optional[Tuple[int, np.ndarray, List[np.ndarray], bool]] = None

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    @property
    def param_ids(self) -> List[str]:
        ids = []
        for k in range(self.n_layers):
            ids += [f"l{k}.weight", f"l{k}.bias"]
        return ids

    @property
    def n_params(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Evaluate the network and cache the activations for `backward`"""
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        batch = x[None, :] if single else x
        if batch.ndim != 2 or batch.shape[1] != self.sizes[0]:
            raise ShapeError(f"{self.name} expects inputs of length {self.sizes[0]}, got shape {x.shape}")

        activations = [batch]
        a = batch
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = a @ w + b
            a = z if k == self.n_layers - 1 else np.tanh(z)
            if k < self.n_layers - 1:
                activations.append(a)

        self._cache = (self._version, batch, activations, single)
        return a[0] if single else a

    def predict(self, x: np.ndarray) -> np.ndarray:
        """Evaluate without touching the backward cache"""
        cache = self._cache
        try:
            return self.forward(x)
        finally:
            self._cache = cache

    def backward(self, upstream: np.ndarray) -> Gradients:
        """
        Gradients of sum(output * upstream) for the last forward pass

        Args:
            upstream: same shape as the last output

        Returns:
            Flat gradient per subset id
        """
        if self._cache is None:
            raise ContractError(f"{self.name}: backward() called without a forward pass")
        version, batch, activations, single = self._cache
        if version != self._version:
            raise ContractError(f"{self.name}: parameters changed since the last forward pass")

        g = np.asarray(upstream, dtype=np.float64)
        g = g[None, :] if single and g.ndim == 1 else g
        if g.shape != (batch.shape[0], self.sizes[-1]):
            raise ShapeError(f"upstream gradient shape {np.shape(upstream)} does not match the output")

        grads: Gradients = {}
        for k in reversed(range(self.n_layers)):
            a = activations[k]
            grads[f"l{k}.weight"] = (a.T @ g).reshape(-1)
            grads[f"l{k}.bias"] = g.sum(axis=0)
            if k > 0:
                g = (g @ self.weights[k].T) * (1.0 - a * a)
        return {pid: grads[pid] for pid in self.param_ids}

    def cached_input(self) -> Optional[np.ndarray]:
        if self._cache is None:
            return None
        _, batch, _, single = self._cache
        return batch[0] if single else batch

    def sgd_step(self, grads: Gradients, learning_rate: float) -> "Mlp":
        """theta <- theta - learning_rate * g for every subset; keys must match the registry"""
        check_gradient_keys(grads, self.param_ids)
        for k in range(self.n_layers):
            self.weights[k] = self.weights[k] - learning_rate * np.reshape(grads[f"l{k}.weight"], self.weights[k].shape)
            self.biases[k] = self.biases[k] - learning_rate * np.reshape(grads[f"l{k}.bias"], self.biases[k].shape)
        self._version += 1
        return self

    def subsets(self) -> List[ParamSubset]:
        out = []
        for k in range(self.n_layers):
            out.append(ParamSubset(f"l{k}.weight", self.weights[k]))
            out.append(ParamSubset(f"l{k}.bias", self.biases[k]))
        return out

    def assign(self, subsets: Sequence[ParamSubset]) -> "Mlp":
        """Overwrite parameters from subsets carrying registered ids"""
        for subset in subsets:
            kind, k = _parse_id(subset.id, self.n_layers)
            current = self.weights[k] if kind == "weight" else self.biases[k]
            if subset.size != current.size:
                raise ShapeError(f"subset '{subset.id}' has {subset.size} values, expected {current.size}")
            values = subset.values.reshape(current.shape).copy()
            if kind == "weight":
                self.weights[k] = values
            else:
                self.biases[k] = values
        self._version += 1
        return self

    def copy(self) -> "Mlp":
        clone = Mlp.__new__(Mlp)
        clone.sizes = self.sizes
        clone.name = self.name
        clone.weights = [w.copy() for w in self.weights]
        clone.biases = [b.copy() for b in self.biases]
        clone._version = 0
        clone._cache = None
        return clone

    def max_abs(self) -> Tuple[float, str]:
        """Largest parameter magnitude (inf for non-finite values) and the subset holding it"""
        arrays = [a for pair in zip(self.weights, self.biases) for a in pair]
        best, where = 0.0, ""
        for pid, values in zip(self.param_ids, arrays):
            value = float(np.max(np.abs(values))) if np.all(np.isfinite(values)) else float("inf")
            if value > best or not where:
                best, where = value, pid
        return best, where

    def state_dict(self) -> dict:
        return {
            "format": PARAMS_FORMAT,
            "name": self.name,
            "sizes": list(self.sizes),
            "subsets": [
                {"id": s.id, "shape": list(self._shape_of(s.id)), "values": s.values} for s in self.subsets()
            ],
        }

    def load_state_dict(self, doc: dict) -> "Mlp":
        doc = serialization.check_format(doc, PARAMS_FORMAT)
        if tuple(doc["sizes"]) != self.sizes:
            raise ShapeError(f"checkpoint sizes {doc['sizes']} do not match {list(self.sizes)}")
        entries = [e for e in doc["subsets"] if e["id"] in set(self.param_ids)]
        return self.assign([ParamSubset(e["id"], np.asarray(e["values"], dtype=np.float64)) for e in entries])

    @classmethod
    def from_state_dict(cls, doc: dict) -> "Mlp":
        doc = serialization.check_format(doc, PARAMS_FORMAT)
        net = cls(doc["sizes"], name=doc.get("name", "mlp"))
        return net.load_state_dict(doc)

    def _shape_of(self, subset_id: str) -> Tuple[int, ...]:
        kind, k = _parse_id(subset_id, self.n_layers)
        return (self.weights[k] if kind == "weight" else self.biases[k]).shape


def _parse_id(subset_id: str, n_layers: int) -> Tuple[str, int]:
    layer, _, kind = subset_id.partition(".")
    if kind not in ("weight", "bias") or not layer.startswith("l") or not layer[1:].isdigit():
        raise ArgumentError(f"unknown subset id '{subset_id}'")
    k = int(layer[1:])
    if k >= n_layers:
        raise ArgumentError(f"unknown subset id '{subset_id}'")
    return kind, k


def check_gradient_keys(grads: Gradients, ids: Sequence[str]) -> None:
    missing = [pid for pid in ids if pid not in grads]
    if missing:
        raise ArgumentError(f"missing gradients for subsets {missing}")
    extra = sorted(set(grads) - set(ids))
    if extra:
        raise ArgumentError(f"gradients for unknown subsets {extra}")


def forward(net: Mlp, x: np.ndarray) -> np.ndarray:
    return net.forward(x)


def backward(net: Mlp, x: np.ndarray, upstream: np.ndarray) -> Gradients:
    """Backward pass for input `x`, which must be the input of the cached forward pass"""
    cached = net.cached_input()
    if cached is None or np.shape(cached) != np.shape(x) or not np.array_equal(cached, x):
        raise ContractError(f"{net.name}: no cached forward pass for this input")
    return net.backward(upstream)


def sgd_step(net: Mlp, grads: Gradients, learning_rate: float) -> Mlp:
    return net.sgd_step(grads, learning_rate)


def clip_grad_norm(grads: Gradients, max_norm: float) -> Tuple[Gradients, float]:
    """
    Rescale all subsets together so the global L2 norm is at most `max_norm`

    Returns:
        (clipped gradients, norm before clipping)
    """
    if not max_norm > 0.0:
        raise ConfigError("max_grad_norm", f"must be positive, got {max_norm!r}")
    norm = float(np.sqrt(sum(float(np.dot(g, g)) for g in grads.values())))
    if not np.isfinite(norm):
        raise NumericError(f"non-finite gradient norm {norm}")
    if norm <= max_norm:
        return grads, norm
    factor = max_norm / norm
    return {pid: g * factor for pid, g in grads.items()}, norm
