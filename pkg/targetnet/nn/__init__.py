"""
Small numpy networks: MLP with manual backprop and a Gaussian policy head
"""

from .mlp import PARAMS_FORMAT, Mlp, backward, clip_grad_norm, forward, sgd_step
from .policy import LOG_STD_ID, LOG_STD_MAX, LOG_STD_MIN, GaussianPolicy

__all__ = [
    "PARAMS_FORMAT", "Mlp", "backward", "clip_grad_norm", "forward", "sgd_step",
    "LOG_STD_ID", "LOG_STD_MAX", "LOG_STD_MIN", "GaussianPolicy",
]
