"""
Optimizers that return the additive step instead of mutating weights.

Partial updating needs the applied step Delta w^q itself (the local
contribution accumulates -g * Delta w, sparse fine-tuning projects it onto
the mask), so optimizer_step returns (step, new_state) and leaves the
weight update w^q = w^{q-1} + step to the caller.
"""

import logging
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

log = logging.getLogger(__name__)


class OptimizerKind(str, Enum):
    SGD = "sgd"
    NESTEROV_SGD = "nesterov_sgd"
    ADAM = "adam"


def step_decay_schedule(
    initial_rate: float,
    iterations: int,
    decay_factor: float = 0.1,
    decay_interval: int | None = None,
) -> np.ndarray:
    """
    Per-iteration learning-rate table with step decay.

    Entry q-1 holds the rate for iteration q:
    initial_rate * decay_factor ** ((q - 1) // decay_interval).

    Args:
        initial_rate: rate of the first iteration, positive
        iterations: table length Q, positive
        decay_factor: multiplier applied every decay_interval iterations
        decay_interval: iterations between decays; None keeps the rate fixed

    Returns:
        float64 array of length iterations
    """
    if initial_rate <= 0:
        raise ValueError(f"learning rate must be positive, got {initial_rate}")
    if iterations < 1:
        raise ValueError(f"schedule needs at least one iteration, got {iterations}")
    if not 0 < decay_factor <= 1:
        raise ValueError(f"decay factor must be in (0, 1], got {decay_factor}")
    q = np.arange(iterations)
    if decay_interval is None:
        return np.full(iterations, float(initial_rate))
    if decay_interval < 1:
        raise ValueError(f"decay interval must be >= 1, got {decay_interval}")
    return initial_rate * decay_factor ** (q // decay_interval).astype(np.float64)


@dataclass(frozen=True, eq=False)
class OptimizerState:
    """
    Optimizer kind, hyperparameters, learning-rate table and moment vectors.

    Moments (velocity for Nesterov, first/second moments for Adam) have the
    length of the weight vector and start at zero.
    """

    kind: OptimizerKind
    schedule: np.ndarray
    momentum: float = 0.9
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    first_moment: np.ndarray | None = None
    second_moment: np.ndarray | None = None
    steps: int = 0

    @classmethod
    def create(
        cls,
        kind: OptimizerKind | str,
        schedule: np.ndarray,
        n_weights: int,
        **hyperparams,
    ) -> "OptimizerState":
        kind = OptimizerKind(kind)
        schedule = np.asarray(schedule, dtype=np.float64)
        if schedule.ndim != 1 or schedule.shape[0] < 1 or np.any(schedule <= 0):
            raise ValueError("learning-rate schedule must be a non-empty positive table")
        first = second = None
        if kind is OptimizerKind.NESTEROV_SGD:
            first = np.zeros(n_weights)
        elif kind is OptimizerKind.ADAM:
            first = np.zeros(n_weights)
            second = np.zeros(n_weights)
        return cls(
            kind=kind,
            schedule=schedule,
            first_moment=first,
            second_moment=second,
            **hyperparams,
        )

    @property
    def n_weights(self) -> int | None:
        return None if self.first_moment is None else self.first_moment.shape[0]

    def rate(self, q: int) -> float:
        """Learning rate of iteration q; the last entry holds beyond the table."""
        return float(self.schedule[min(q, self.schedule.shape[0]) - 1])

    def fresh(self, schedule: np.ndarray | None = None) -> "OptimizerState":
        """Same kind and hyperparameters with zeroed moments."""
        return replace(
            self,
            schedule=self.schedule if schedule is None else np.asarray(schedule, float),
            first_moment=None if self.first_moment is None else np.zeros_like(self.first_moment),
            second_moment=None if self.second_moment is None else np.zeros_like(self.second_moment),
            steps=0,
        )


def optimizer_step(
    state: OptimizerState, g: np.ndarray, q: int
) -> tuple[np.ndarray, OptimizerState]:
    """
    Compute the step Delta w^q for gradient g at iteration q.

    sgd:          step = -alpha g
    nesterov_sgd: v = mu v + g;  step = -alpha (g + mu v)
    adam:         bias-corrected first/second moments, step = -alpha m_hat / (sqrt(v_hat) + eps)

    Args:
        state: optimizer state before the step
        g: finite gradient at w^{q-1}
        q: 1-based iteration index, selects alpha^q from the schedule

    Returns:
        (step, state after the step)
    """
    if q < 1:
        raise ValueError(f"iteration index must be >= 1, got {q}")
    g = np.asarray(g, dtype=np.float64)
    if not np.all(np.isfinite(g)):
        raise ValueError("gradient contains NaN or Inf")
    if state.n_weights is not None and g.shape[0] != state.n_weights:
        raise ValueError(
            f"gradient length {g.shape[0]} does not match optimizer state {state.n_weights}"
        )
    alpha = state.rate(q)

    if state.kind is OptimizerKind.SGD:
        return -alpha * g, replace(state, steps=state.steps + 1)

    if state.kind is OptimizerKind.NESTEROV_SGD:
        velocity = state.momentum * state.first_moment + g
        step = -alpha * (g + state.momentum * velocity)
        return step, replace(state, first_moment=velocity, steps=state.steps + 1)

    t = state.steps + 1
    first = state.beta1 * state.first_moment + (1.0 - state.beta1) * g
    second = state.beta2 * state.second_moment + (1.0 - state.beta2) * g * g
    first_hat = first / (1.0 - state.beta1**t)
    second_hat = second / (1.0 - state.beta2**t)
    step = -alpha * first_hat / (np.sqrt(second_hat) + state.epsilon)
    return step, replace(state, first_moment=first, second_moment=second, steps=t)
