"""
Logging filters for experiment runs.
"""

import logging
from contextlib import contextmanager
from contextvars import ContextVar

_cell: ContextVar[tuple[str, int] | None] = ContextVar("dpu_sim_cell", default=None)


@contextmanager
def experiment_context(method: str, seed: int):
    """Attribute log records emitted inside the block to (method, seed)."""
    token = _cell.set((method, seed))
    try:
        yield
    finally:
        _cell.reset(token)


class ExperimentContextFilter(logging.Filter):
    """
    Stamp records with the experiment cell they were emitted in.

    Adds `method`, `seed` and a ready-made `cell` prefix such as
    "[dpu/seed 3] " (empty outside an experiment) for use in formats.
    """

    def filter(self, record: logging.LogRecord) -> bool:
        cell = _cell.get()
        if cell is None:
            record.method = "-"
            record.seed = "-"
            record.cell = ""
        else:
            record.method, record.seed = cell
            record.cell = f"[{cell[0]}/seed {cell[1]}] "
        return True


class SuppressDegenerateWarningsFilter(logging.Filter):
    """
    Drop the per-round warnings about degenerate contribution normalization.

    Under momentum or Adam the local contribution sum can be near zero in
    many rounds; opt in from a logging config to silence them:

        filters:
          quiet_degenerate:
            (): dpu_sim.logging.SuppressDegenerateWarningsFilter
    """

    def filter(self, record: logging.LogRecord) -> bool:
        if record.name != "dpu_sim.contribution.metrics":
            return True
        try:
            msg = record.getMessage().lower()
        except Exception:
            return True

        if "normalizing by its l1 norm" in msg:
            return False

        if "contribution is zero" in msg:
            return False

        return True
