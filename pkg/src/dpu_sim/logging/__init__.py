"""
Logging filters and setup for dpu-sim.

The filters can be used in a logging.yaml passed with --logging-config:

    filters:
      cell:
        (): dpu_sim.logging.ExperimentContextFilter
      quiet_degenerate:
        (): dpu_sim.logging.SuppressDegenerateWarningsFilter
"""

from dpu_sim.logging.filters import (
    ExperimentContextFilter,
    SuppressDegenerateWarningsFilter,
    experiment_context,
)
from dpu_sim.logging.setup import configure_logging

__all__ = [
    "ExperimentContextFilter",
    "SuppressDegenerateWarningsFilter",
    "configure_logging",
    "experiment_context",
]
