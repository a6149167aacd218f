"""
Logging configuration for the command-line tools and pool workers.
"""

import logging
import logging.config
import os
from pathlib import Path

import yaml

from dpu_sim.logging.filters import ExperimentContextFilter

LOG_FORMAT = "%(asctime)s %(levelname)-7s %(cell)s%(name)s: %(message)s"


def env_flag(name: str, default: str = "") -> bool:
    return os.environ.get(name, default).strip().lower() not in ("", "0", "false", "no")


def configure_logging(
    logging_config: str | Path | None = None,
    debug: bool | None = None,
    quiet: bool | None = None,
    level: int | None = None,
) -> None:
    """
    Set up the root logger.

    A YAML logging_config file is passed to logging.config.dictConfig as
    is. Otherwise a stderr handler is installed whose level follows, in
    order of preference: level, debug (DEBUG env var), quiet (QUIET env
    var, on unless set empty or "0").

    Raises:
        FileNotFoundError: logging_config does not exist
        ValueError: logging_config is not a valid dictConfig document
    """
    if logging_config:
        with open(logging_config, "r") as fh:
            cfg = yaml.safe_load(fh)
        if not isinstance(cfg, dict):
            raise ValueError(f"{logging_config}: logging config must be a mapping")
        logging.config.dictConfig(cfg)
        return

    if level is None:
        debug = env_flag("DEBUG") if debug is None else debug
        quiet = env_flag("QUIET", "1") if quiet is None else quiet
        level = logging.DEBUG if debug else (logging.WARNING if quiet else logging.INFO)

    handler = logging.StreamHandler()
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    handler.addFilter(ExperimentContextFilter())
    root = logging.getLogger()
    for existing in list(root.handlers):
        root.removeHandler(existing)
    root.addHandler(handler)
    root.setLevel(level)
