"""
Central-difference gradient oracle used to verify loss_and_gradient.
"""

from typing import Callable

import numpy as np

from dpu_sim.nn.network import Batch, WeightVector, loss


def central_difference(
    fn: Callable[[np.ndarray], float], x: np.ndarray, eps: float
) -> np.ndarray:
    """
    Estimate the gradient of a scalar function coordinate by coordinate.

    Each coordinate costs two evaluations of fn:
    (fn(x + eps e_i) - fn(x - eps e_i)) / (2 eps).

    Args:
        fn: scalar function of a 1-D float64 array
        x: point to differentiate at (not modified)
        eps: step size, must be positive

    Returns:
        gradient estimate with the shape of x
    """
    if not eps > 0:
        raise ValueError(f"finite-difference step must be positive, got {eps}")
    x = np.array(x, dtype=np.float64)
    grad = np.empty_like(x)
    for i in range(x.shape[0]):
        original = x[i]
        x[i] = original + eps
        upper = fn(x)
        x[i] = original - eps
        lower = fn(x)
        x[i] = original
        grad[i] = (upper - lower) / (2.0 * eps)
    return grad


def finite_diff_gradient(w: WeightVector, data: Batch, eps: float = 1e-5) -> np.ndarray:
    """Central-difference estimate of the cross-entropy gradient at w."""
    arch = w.arch
    return central_difference(lambda v: loss(WeightVector(v, arch), data), w.values, eps)


def relative_error(a: np.ndarray, b: np.ndarray) -> float:
    """||a - b|| / max(||a||, ||b||), zero when both vectors are zero."""
    scale = max(float(np.linalg.norm(a)), float(np.linalg.norm(b)))
    if scale == 0.0:
        return 0.0
    return float(np.linalg.norm(np.asarray(a) - np.asarray(b))) / scale
