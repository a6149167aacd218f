"""
Two-step partial updating: full update, rewind, sparse fine-tune.

Mask selection from contribution vectors, per-layer random masks, and the
global-contribution (GCPU) and deep partial updating (DPU) round procedures.
"""

from dpu_sim.update.mask import (
    Mask,
    rewind,
    rpu_mask,
    select_mask,
    target_k_count,
)
from dpu_sim.update.procedures import (
    FullUpdate,
    PartialUpdateResult,
    SparseDelta,
    dpu_round,
    full_update,
    gcpu_round,
    sparse_finetune,
)
from dpu_sim.update.training import BatchSource, FullBatch, TrainResult, run_steps

__all__ = [
    "BatchSource",
    "FullBatch",
    "FullUpdate",
    "Mask",
    "PartialUpdateResult",
    "SparseDelta",
    "TrainResult",
    "dpu_round",
    "full_update",
    "gcpu_round",
    "rewind",
    "rpu_mask",
    "run_steps",
    "select_mask",
    "sparse_finetune",
    "target_k_count",
]
