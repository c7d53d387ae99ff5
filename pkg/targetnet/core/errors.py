"""
Exception hierarchy for targetnet

Every error raised by the library derives from TargetNetError so callers
(and the CLI) can catch one type.
"""

from typing import Optional


class TargetNetError(Exception):
    """Base class for all targetnet errors"""


class ConfigError(TargetNetError, ValueError):
    """Hyperparameter or configuration value out of its allowed range"""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class ShapeError(TargetNetError, ValueError):
    """Mismatched vector or matrix shapes"""


class ArgumentError(TargetNetError, ValueError):
    """Invalid argument to a numerical routine (e.g. empty input)"""


class NumericError(TargetNetError, ArithmeticError):
    """Non-finite values or degenerate statistics"""


class ContractError(TargetNetError, RuntimeError):
    """Call-order contract violated (e.g. backward without a fresh forward)"""


class DivergenceError(TargetNetError, RuntimeError):
    """A training run left the admissible parameter range"""

    def __init__(self, step: int, magnitude: float, limit: float, subset_id: Optional[str] = None):
        self.step = step
        self.magnitude = magnitude
        self.limit = limit
        self.subset_id = subset_id
        where = f" in {subset_id}" if subset_id else ""
        super().__init__(
            f"parameter magnitude {magnitude:.3g} exceeded {limit:.3g}{where} at step {step}"
        )
