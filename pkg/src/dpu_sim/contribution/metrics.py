"""
Per-weight contribution to the loss reduction of a full update.

global:   c_i = (w_f,i - w_i)^2, the squared displacement of the full update
local:    c_i = -sum_q g_i(w^{q-1}) * Delta w_i^q, accumulated along the path
combined: each vector divided by its entry sum, then added
"""

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

from dpu_sim.nn.network import WeightVector

log = logging.getLogger(__name__)

DEGENERATE_SUM = 1e-12


class ContributionError(ValueError):
    """Raised when no contribution vector carries any usable signal."""


class ContributionKind(str, Enum):
    GLOBAL = "global"
    LOCAL = "local"
    COMBINED = "combined"


@dataclass(eq=False)
class ContributionVector:
    values: np.ndarray
    kind: ContributionKind

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        self.kind = ContributionKind(self.kind)
        if self.values.ndim != 1:
            raise ValueError("contribution vector must be 1-D")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("contribution vector contains NaN or Inf")
        if self.kind is ContributionKind.GLOBAL and np.any(self.values < 0):
            raise ValueError("global contribution must be non-negative")

    def __len__(self) -> int:
        return self.values.shape[0]


@dataclass(eq=False)
class TraceState:
    """Running local contribution and the number of steps folded in."""

    accumulator: np.ndarray
    steps_seen: int = 0

    @classmethod
    def zeros(cls, n_weights: int) -> "TraceState":
        return cls(np.zeros(n_weights, dtype=np.float64), 0)

    def as_contribution(self) -> ContributionVector:
        return ContributionVector(self.accumulator.copy(), ContributionKind.LOCAL)


def accumulate_local(trace: TraceState, g: np.ndarray, step: np.ndarray) -> TraceState:
    """
    Fold one optimization step into the local contribution.

    Args:
        trace: trace before iteration q
        g: gradient at w^{q-1}
        step: applied step Delta w^q (after momentum / adaptive scaling)

    Returns:
        trace with accumulator - g * step and steps_seen + 1
    """
    g = np.asarray(g, dtype=np.float64)
    step = np.asarray(step, dtype=np.float64)
    n = trace.accumulator.shape[0]
    if g.shape != (n,) or step.shape != (n,):
        raise ValueError(
            f"trace has length {n}, got gradient {g.shape} and step {step.shape}"
        )
    return TraceState(trace.accumulator - g * step, trace.steps_seen + 1)


def global_contribution(w: WeightVector, w_f: WeightVector) -> ContributionVector:
    """Squared displacement between the deployed and fully-updated weights."""
    w.require_same_arch(w_f)
    displacement = w_f.values - w.values
    return ContributionVector(displacement * displacement, ContributionKind.GLOBAL)


def _normalized(c: ContributionVector) -> np.ndarray | None:
    total = float(c.values.sum())
    if total > DEGENERATE_SUM:
        return c.values / total
    l1 = float(np.abs(c.values).sum())
    if l1 > DEGENERATE_SUM:
        log.warning(
            f"{c.kind.value} contribution sums to {total:.3e}; "
            f"normalizing by its L1 norm {l1:.3e} instead"
        )
        return c.values / l1
    log.warning(f"{c.kind.value} contribution is zero; ignoring it")
    return None


def combine(c_global: ContributionVector, c_local: ContributionVector) -> ContributionVector:
    """
    Sum of the entry-sum-normalized global and local contributions.

    A vector whose entry sum is <= 1e-12 (local contributions can be negative
    under momentum or Adam) is normalized by its L1 norm instead; if that is
    also <= 1e-12 it is dropped and the other vector is used alone.

    Raises:
        ContributionError: if both vectors are degenerate
    """
    if len(c_global) != len(c_local):
        raise ValueError(
            f"contribution lengths differ: {len(c_global)} vs {len(c_local)}"
        )
    parts = [p for p in (_normalized(c_global), _normalized(c_local)) if p is not None]
    if not parts:
        raise ContributionError(
            "both global and local contributions are zero; no weight can be ranked"
        )
    combined = parts[0] if len(parts) == 1 else parts[0] + parts[1]
    return ContributionVector(combined, ContributionKind.COMBINED)
