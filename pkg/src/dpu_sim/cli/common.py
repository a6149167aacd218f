"""
Argument and error handling shared by the dpu-sim commands.
"""

import argparse
import sys

from dpu_sim.logging.setup import configure_logging
from dpu_sim.rounds.config import ExperimentConfig
from dpu_sim.utils.config import ConfigError, load_config, parse_methods, parse_seeds


def add_logging_argument(p: argparse.ArgumentParser) -> None:
    p.add_argument("--logging-config", help="Logging config file (YAML dictConfig)")


def add_workers_argument(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--workers",
        type=int,
        help="Parallel worker processes (capped by DPU_SIM_MAX_WORKERS)",
    )


def setup_logging(args: argparse.Namespace) -> bool:
    """Configure logging from --logging-config or DEBUG/QUIET; False on failure."""
    try:
        configure_logging(args.logging_config)
    except (OSError, ValueError) as e:
        print(f"Failed to load logging config: {e}", file=sys.stderr)
        return False
    return True


def read_config(path: str) -> ExperimentConfig | None:
    """Load a config, printing the located diagnostic on failure."""
    try:
        return load_config(path)
    except ConfigError as e:
        print(f"Invalid config: {e}", file=sys.stderr)
        return None


def selection(args: argparse.Namespace) -> tuple[tuple | None, tuple | None] | None:
    """Parse --methods and --seeds; None (after a diagnostic) when invalid."""
    try:
        methods = parse_methods(args.methods) if getattr(args, "methods", None) else None
        seeds = parse_seeds(args.seeds) if args.seeds else None
    except ValueError as e:
        print(f"Invalid selection: {e}", file=sys.stderr)
        return None
    return methods, seeds
