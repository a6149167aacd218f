"""
Binary update masks: top-k selection, per-layer random masks and rewinding.
"""

import logging
import math

import numpy as np

from dpu_sim.contribution.metrics import ContributionVector
from dpu_sim.nn.network import Architecture, WeightVector

log = logging.getLogger(__name__)


class Mask:
    """Immutable length-I binary vector; ones mark weights allowed to change."""

    __slots__ = ("bits",)

    def __init__(self, bits):
        bits = np.array(bits, dtype=bool)
        if bits.ndim != 1:
            raise ValueError(f"mask must be 1-D, got shape {bits.shape}")
        bits.setflags(write=False)
        self.bits = bits

    @classmethod
    def full(cls, n_weights: int) -> "Mask":
        return cls(np.ones(n_weights, dtype=bool))

    @classmethod
    def empty(cls, n_weights: int) -> "Mask":
        return cls(np.zeros(n_weights, dtype=bool))

    def __len__(self) -> int:
        return self.bits.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Mask):
            return NotImplemented
        return np.array_equal(self.bits, other.bits)

    __hash__ = None

    def __repr__(self) -> str:
        return f"Mask(I={len(self)}, ones={self.cardinality})"

    @property
    def cardinality(self) -> int:
        return int(np.count_nonzero(self.bits))

    def ones(self) -> np.ndarray:
        """Indices of the ones, ascending."""
        return np.flatnonzero(self.bits)


def _check_ratio(k: float) -> None:
    if not 0 < k <= 1:
        raise ValueError(f"updating ratio k must be in (0, 1], got {k}")


def target_k_count(n_weights: int, k: float) -> int:
    """
    Number of weights a ratio k allows to change: round(k * I) half-up,
    clamped to [1, I].
    """
    if n_weights < 1:
        raise ValueError(f"weight count must be positive, got {n_weights}")
    _check_ratio(k)
    return min(max(math.floor(k * n_weights + 0.5), 1), n_weights)


def select_mask(c: ContributionVector | np.ndarray, k: float) -> Mask:
    """
    Ones at the target_k_count(I, k) largest contributions.

    Sorting is stable on the negated values, so among equal contributions
    the lower index wins.
    """
    values = c.values if isinstance(c, ContributionVector) else np.asarray(c, float)
    count = target_k_count(values.shape[0], k)
    order = np.argsort(-values, kind="stable")
    bits = np.zeros(values.shape[0], dtype=bool)
    bits[order[:count]] = True
    return Mask(bits)


def rpu_mask(arch: Architecture, k: float, seed: int) -> Mask:
    """
    Per-layer uniformly random mask for random partial updating.

    Every layer (matrix and biases together) gets exactly round(k * I_layer)
    ones, so the global count can differ from target_k_count(I, k).
    """
    _check_ratio(k)
    rng = np.random.default_rng(seed)
    bits = np.zeros(arch.n_weights, dtype=bool)
    for layer in arch.layers:
        count = min(math.floor(k * layer.size + 0.5), layer.size)
        chosen = rng.choice(layer.size, size=count, replace=False)
        bits[layer.start + chosen] = True
    return Mask(bits)


def rewind(w: WeightVector, w_f: WeightVector, mask: Mask) -> WeightVector:
    """Take w_f where the mask is one and keep w everywhere else."""
    w.require_same_arch(w_f)
    if len(mask) != len(w):
        raise ValueError(f"mask length {len(mask)} does not match I={len(w)}")
    return WeightVector(np.where(mask.bits, w_f.values, w.values), w.arch)
