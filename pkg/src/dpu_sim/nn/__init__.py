"""
Dense neural-network training substrate.

Deterministic float64 multilayer perceptrons with a flat weight vector,
softmax cross-entropy, SGD/Nesterov/Adam steps and a central-difference
gradient oracle.
"""

from dpu_sim.nn.gradcheck import (
    central_difference,
    finite_diff_gradient,
    relative_error,
)
from dpu_sim.nn.network import (
    Architecture,
    Batch,
    DimensionError,
    LayerSlice,
    WeightVector,
    accuracy,
    init_weights,
    loss,
    loss_and_gradient,
    predict,
)
from dpu_sim.nn.optim import (
    OptimizerKind,
    OptimizerState,
    optimizer_step,
    step_decay_schedule,
)

__all__ = [
    "Architecture",
    "Batch",
    "DimensionError",
    "LayerSlice",
    "OptimizerKind",
    "OptimizerState",
    "WeightVector",
    "accuracy",
    "central_difference",
    "finite_diff_gradient",
    "init_weights",
    "loss",
    "loss_and_gradient",
    "optimizer_step",
    "predict",
    "relative_error",
    "step_decay_schedule",
]
