"""
Training loop shared by full updating and sparse fine-tuning.
"""

import logging
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from dpu_sim.contribution.metrics import TraceState, accumulate_local
from dpu_sim.nn.network import Batch, WeightVector, loss_and_gradient
from dpu_sim.nn.optim import OptimizerState, optimizer_step
from dpu_sim.update.mask import Mask

log = logging.getLogger(__name__)


class BatchSource(Protocol):
    """Supplies the batch of iteration q and the full training set."""

    def batch(self, q: int) -> Batch: ...

    def full(self) -> Batch: ...


@dataclass
class FullBatch:
    """Every iteration sees the whole training set."""

    data: Batch

    def batch(self, q: int) -> Batch:
        return self.data

    def full(self) -> Batch:
        return self.data


@dataclass(eq=False)
class TrainResult:
    weights: WeightVector
    optimizer: OptimizerState
    trace: TraceState | None


def run_steps(
    w: WeightVector,
    data: BatchSource,
    opt: OptimizerState,
    iterations: int,
    mask: Mask | None = None,
    track_local: bool = False,
) -> TrainResult:
    """
    Run iterations optimizer steps starting from w.

    With a mask, each step is computed from the full gradient and then
    projected: coordinates where the mask is zero keep their value bit for
    bit. With track_local, -g * step is accumulated into a trace.
    """
    arch = w.arch
    values = w.values.copy()
    trace = TraceState.zeros(len(w)) if track_local else None
    for q in range(1, iterations + 1):
        _, g = loss_and_gradient(WeightVector(values, arch), data.batch(q))
        step, opt = optimizer_step(opt, g, q)
        if trace is not None:
            trace = accumulate_local(trace, g, step)
        if mask is None:
            values = values + step
        else:
            values = np.where(mask.bits, values + step, values)
    log.debug(f"ran {iterations} steps ({opt.kind.value}, masked={mask is not None})")
    return TrainResult(WeightVector(values, arch), opt, trace)
