"""
Parameter subsets

A ParamSubset is one flat parameter vector (a weight matrix or a bias vector
flattened) with a stable identifier. Every update rule works subset by subset.
"""

from dataclasses import dataclass, field
from typing import Sequence, Tuple

import numpy as np

from .errors import NumericError, ShapeError


@dataclass(frozen=True)
class ParamSubset:
    """One registered parameter group"""
    id: str
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64).reshape(-1)
        if values.size < 1:
            raise ShapeError(f"subset '{self.id}' must hold at least one parameter")
        if not np.all(np.isfinite(values)):
            raise NumericError(f"subset '{self.id}' contains non-finite values")
        object.__setattr__(self, "values", values)

    @property
    def size(self) -> int:
        return int(self.values.size)

    def with_values(self, values: np.ndarray) -> "ParamSubset":
        return ParamSubset(self.id, values)


def check_same_shape(subset: ParamSubset, vector: np.ndarray, what: str = "target") -> None:
    if np.shape(vector) != subset.values.shape:
        raise ShapeError(
            f"subset '{subset.id}' has shape {subset.values.shape} but {what} has shape {np.shape(vector)}"
        )


def check_finite(subset: ParamSubset, vector: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(vector)):
        raise NumericError(f"{what} of subset '{subset.id}' contains non-finite values")


def match_subsets(main: Sequence[ParamSubset], ids: Sequence[str]) -> Tuple[ParamSubset, ...]:
    """Check that `main` lists exactly the registered subset ids, in order"""
    found = tuple(s.id for s in main)
    if found != tuple(ids):
        raise ShapeError(f"expected subsets {list(ids)}, got {list(found)}")
    return tuple(main)
