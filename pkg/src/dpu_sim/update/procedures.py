"""
Two-step partial updating procedures.

Step one trains all weights for Q iterations from the deployed weights w
to w_f. A mask keeps the k*I most important coordinates of w_f and rewinds
all others to w. Step two fine-tunes only the masked coordinates for another
Q iterations with the same learning-rate table and a fresh optimizer state.

gcpu_round ranks weights by global contribution only; dpu_round ranks them
by the combined global and local contribution.
"""

import logging
from dataclasses import dataclass, replace

import numpy as np

from dpu_sim.contribution.metrics import (
    ContributionVector,
    TraceState,
    combine,
    global_contribution,
)
from dpu_sim.nn.network import WeightVector, loss
from dpu_sim.nn.optim import OptimizerState
from dpu_sim.update.mask import Mask, rewind, select_mask
from dpu_sim.update.training import BatchSource, run_steps

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SparseDelta:
    """Changed coordinates: ascending indices and their increments."""

    indices: np.ndarray
    values: np.ndarray

    def __len__(self) -> int:
        return self.indices.shape[0]

    def as_dict(self) -> dict[int, float]:
        return {int(i): float(v) for i, v in zip(self.indices, self.values)}

    def densify(self, n_weights: int) -> np.ndarray:
        dense = np.zeros(n_weights, dtype=np.float64)
        dense[self.indices] = self.values
        return dense


@dataclass(frozen=True, eq=False)
class PartialUpdateResult:
    """
    Outcome of one partial update of the deployed weights.

    delta holds w_new - base on the mask support. Coordinates outside the
    mask are bit-identical to base. train_loss_full is None when no full
    update preceded the fine-tuning (random partial updating).
    """

    w_new: WeightVector
    mask: Mask
    delta: SparseDelta
    train_loss_full: float | None
    train_loss_rewound: float
    train_loss_final: float
    w_full: WeightVector | None = None
    contribution: ContributionVector | None = None
    trace: TraceState | None = None


@dataclass(frozen=True, eq=False)
class FullUpdate:
    """Result of the first step: w_f, its training loss and the local trace."""

    w: WeightVector
    w_f: WeightVector
    train_loss_full: float
    trace: TraceState | None


def full_update(
    w: WeightVector,
    data: BatchSource,
    opt: OptimizerState,
    iterations: int,
    track_local: bool = True,
) -> FullUpdate:
    result = run_steps(w, data, opt.fresh(), iterations, track_local=track_local)
    return FullUpdate(
        w=w,
        w_f=result.weights,
        train_loss_full=loss(result.weights, data.full()),
        trace=result.trace,
    )


def sparse_finetune(
    w_start: WeightVector,
    base: WeightVector,
    mask: Mask,
    data: BatchSource,
    opt: OptimizerState,
    iterations: int,
) -> PartialUpdateResult:
    """
    Fine-tune the masked coordinates of a rewound vector.

    Args:
        w_start: rewound vector, equal to base outside the mask
        base: deployed weights the delta is measured against
        mask: coordinates allowed to change
        data: batch source
        opt: optimizer state to train with
        iterations: number of steps Q

    Returns:
        PartialUpdateResult with train_loss_full unset
    """
    w_start.require_same_arch(base)
    frozen = ~mask.bits
    if not np.array_equal(w_start.values[frozen], base.values[frozen]):
        raise ValueError("start vector differs from base outside the mask")

    result = run_steps(w_start, data, opt, iterations, mask=mask)
    support = mask.ones()
    delta = SparseDelta(support, result.weights.values[support] - base.values[support])
    # rebuilt from the delta so base + densify(delta) reproduces w_new bit for bit
    values = base.values.copy()
    values[support] = base.values[support] + delta.values
    w_new = WeightVector(values, base.arch)
    full = data.full()
    return PartialUpdateResult(
        w_new=w_new,
        mask=mask,
        delta=delta,
        train_loss_full=None,
        train_loss_rewound=loss(w_start, full),
        train_loss_final=loss(w_new, full),
    )


def _rewind_and_finetune(
    first: FullUpdate,
    contribution: ContributionVector,
    k: float,
    data: BatchSource,
    opt: OptimizerState,
    iterations: int,
) -> PartialUpdateResult:
    mask = select_mask(contribution, k)
    rewound = rewind(first.w, first.w_f, mask)
    result = sparse_finetune(rewound, first.w, mask, data, opt.fresh(), iterations)
    log.debug(
        f"{contribution.kind.value} mask: {mask.cardinality}/{len(mask)} weights, "
        f"loss full={first.train_loss_full:.4f} rewound={result.train_loss_rewound:.4f} "
        f"final={result.train_loss_final:.4f}"
    )
    return replace(
        result,
        train_loss_full=first.train_loss_full,
        w_full=first.w_f,
        contribution=contribution,
        trace=first.trace,
    )


def gcpu_round(
    w: WeightVector,
    data: BatchSource,
    k: float,
    opt: OptimizerState,
    iterations: int,
) -> PartialUpdateResult:
    """Global contribution partial updating: rank by (w_f - w)^2 only."""
    first = full_update(w, data, opt, iterations, track_local=False)
    c_global = global_contribution(w, first.w_f)
    return _rewind_and_finetune(first, c_global, k, data, opt, iterations)


def dpu_round(
    w: WeightVector,
    data: BatchSource,
    k: float,
    opt: OptimizerState,
    iterations: int,
) -> PartialUpdateResult:
    """Deep partial updating: rank by the combined global and local contribution."""
    first = full_update(w, data, opt, iterations, track_local=True)
    c_global = global_contribution(w, first.w_f)
    c = combine(c_global, first.trace.as_contribution())
    return _rewind_and_finetune(first, c, k, data, opt, iterations)
