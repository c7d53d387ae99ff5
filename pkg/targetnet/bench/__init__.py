"""
Synthetic tracking benchmark

Seeded main-parameter streams with injected outliers and the metrics that
compare how closely each update rule's target follows the clean trajectory.
"""

from .streams import BASES, RNG_ALGORITHM, StreamSpec, SyntheticStream, generate_stream
from .tracking import TRACE_COLUMNS, TrackMetrics, burn_in_steps, compare_rules, run_comparison, run_tracker

__all__ = [
    "BASES", "RNG_ALGORITHM", "StreamSpec", "SyntheticStream", "generate_stream",
    "TRACE_COLUMNS", "TrackMetrics", "burn_in_steps", "compare_rules", "run_comparison", "run_tracker",
]
