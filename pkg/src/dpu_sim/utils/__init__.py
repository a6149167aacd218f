"""
Utility functions for dpu-sim CLI tools.
"""

from dpu_sim.utils.config import (
    ConfigError,
    load_config,
    load_config_text,
    parse_float_list,
    parse_int_list,
    parse_methods,
    parse_seeds,
)

__all__ = [
    "ConfigError",
    "load_config",
    "load_config_text",
    "parse_float_list",
    "parse_int_list",
    "parse_methods",
    "parse_seeds",
]
