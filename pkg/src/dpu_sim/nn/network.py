"""
Multilayer perceptron with a flat float64 weight vector.

All trainable weights of a network live in one vector of length I. Layer l
occupies a contiguous slice: its (fan_in x fan_out) matrix in row-major
order, followed by its fan_out biases. Hidden layers use ReLU, the output
layer feeds a softmax cross-entropy head.

Batch reductions run on a canonical row order (rows sorted by label, then
by input columns) and the loss is summed with math.fsum, so permuting the
rows of a batch gives bit-identical loss and gradient.
"""

import logging
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

log = logging.getLogger(__name__)


class DimensionError(ValueError):
    """Raised when weights, batches or architectures do not line up."""


@dataclass(frozen=True)
class LayerSlice:
    """Position of one dense layer inside the flat weight vector."""

    index: int
    fan_in: int
    fan_out: int
    start: int

    @property
    def weight_stop(self) -> int:
        return self.start + self.fan_in * self.fan_out

    @property
    def stop(self) -> int:
        return self.weight_stop + self.fan_out

    @property
    def size(self) -> int:
        return self.stop - self.start


@dataclass(frozen=True)
class Architecture:
    """
    Layer sizes of a ReLU multilayer perceptron.

    Args:
        layer_sizes: (input dim, hidden dims..., class count)
        activation: hidden activation, only "relu" is supported
    """

    layer_sizes: tuple[int, ...]
    activation: str = "relu"

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.layer_sizes)
        if len(sizes) < 2:
            raise DimensionError(f"need at least 2 layer sizes, got {len(sizes)}")
        if any(s < 1 for s in sizes):
            raise DimensionError(f"layer sizes must be >= 1, got {list(sizes)}")
        if self.activation != "relu":
            raise ValueError(f"unsupported activation: {self.activation}")
        object.__setattr__(self, "layer_sizes", sizes)

    @property
    def n_inputs(self) -> int:
        return self.layer_sizes[0]

    @property
    def n_classes(self) -> int:
        return self.layer_sizes[-1]

    @cached_property
    def layers(self) -> tuple[LayerSlice, ...]:
        slices = []
        start = 0
        for index, (fan_in, fan_out) in enumerate(
            zip(self.layer_sizes[:-1], self.layer_sizes[1:])
        ):
            layer = LayerSlice(index, fan_in, fan_out, start)
            slices.append(layer)
            start = layer.stop
        return tuple(slices)

    @property
    def n_weights(self) -> int:
        """Total trainable weight count I = sum of (fan_in + 1) * fan_out."""
        return self.layers[-1].stop

    def __str__(self) -> str:
        return "-".join(str(s) for s in self.layer_sizes)


class WeightVector:
    """
    Flat vector of all trainable weights of one network.

    The values are always a fresh, finite float64 array of length I.
    """

    __slots__ = ("values", "arch")

    def __init__(self, values, arch: Architecture):
        values = np.array(values, dtype=np.float64)
        if values.ndim != 1 or values.shape[0] != arch.n_weights:
            raise DimensionError(
                f"weight vector has shape {values.shape}, "
                f"architecture {arch} needs ({arch.n_weights},)"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("weight vector contains NaN or Inf")
        self.values = values
        self.arch = arch

    def __len__(self) -> int:
        return self.values.shape[0]

    def __repr__(self) -> str:
        return f"WeightVector(arch={self.arch}, I={len(self)})"

    def copy(self) -> "WeightVector":
        return WeightVector(self.values, self.arch)

    def identical(self, other: "WeightVector") -> bool:
        """Bit-exact equality of architecture and values."""
        return self.arch == other.arch and np.array_equal(
            self.values.view(np.uint64), other.values.view(np.uint64)
        )

    def require_same_arch(self, other: "WeightVector") -> None:
        if self.arch != other.arch:
            raise DimensionError(
                f"architecture mismatch: {self.arch} vs {other.arch}"
            )

    def params(self) -> list[tuple[np.ndarray, np.ndarray]]:
        """(matrix, bias) views for every layer, in forward order."""
        out = []
        for layer in self.arch.layers:
            matrix = self.values[layer.start : layer.weight_stop].reshape(
                layer.fan_in, layer.fan_out
            )
            bias = self.values[layer.weight_stop : layer.stop]
            out.append((matrix, bias))
        return out


@dataclass
class Batch:
    """Labeled samples: inputs is (batch x input dim), labels is (batch,)."""

    inputs: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        self.inputs = np.asarray(self.inputs, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.inputs.ndim != 2 or self.labels.ndim != 1:
            raise DimensionError(
                f"inputs must be 2-D and labels 1-D, got "
                f"{self.inputs.shape} and {self.labels.shape}"
            )
        if self.inputs.shape[0] != self.labels.shape[0]:
            raise DimensionError(
                f"{self.inputs.shape[0]} input rows but {self.labels.shape[0]} labels"
            )
        if self.labels.shape[0] < 1:
            raise DimensionError("batch must contain at least one sample")
        if np.any(self.labels < 0):
            raise DimensionError("labels must be non-negative")

    def __len__(self) -> int:
        return self.labels.shape[0]

    def canonical(self) -> "Batch":
        """Rows in the fixed reduction order: by label, then input columns."""
        keys = [self.inputs[:, j] for j in range(self.inputs.shape[1] - 1, -1, -1)]
        order = np.lexsort(keys + [self.labels])
        return Batch(self.inputs[order], self.labels[order])

    def check(self, arch: Architecture) -> None:
        if self.inputs.shape[1] != arch.n_inputs:
            raise DimensionError(
                f"batch has {self.inputs.shape[1]} features, "
                f"architecture {arch} expects {arch.n_inputs}"
            )
        if int(self.labels.max()) >= arch.n_classes:
            raise DimensionError(
                f"label {int(self.labels.max())} out of range for "
                f"{arch.n_classes} classes"
            )


def init_weights(arch: Architecture, seed: int) -> WeightVector:
    """
    Draw initial weights deterministically from (arch, seed).

    Matrices are uniform in [-sqrt(6 / (fan_in + fan_out)), +sqrt(...)],
    biases are zero. The edge regenerates the same vector from the seed
    alone, so this function must stay bit-stable.

    Args:
        arch: network architecture
        seed: non-negative integer seed

    Returns:
        WeightVector of length arch.n_weights
    """
    rng = np.random.default_rng(seed)
    values = np.zeros(arch.n_weights, dtype=np.float64)
    for layer in arch.layers:
        limit = math.sqrt(6.0 / (layer.fan_in + layer.fan_out))
        values[layer.start : layer.weight_stop] = rng.uniform(
            -limit, limit, size=layer.fan_in * layer.fan_out
        )
    return WeightVector(values, arch)


def _forward(w: WeightVector, inputs: np.ndarray):
    activations = [inputs]
    pre_activations = []
    params = w.params()
    out = inputs
    for index, (matrix, bias) in enumerate(params):
        z = out @ matrix + bias
        if index == len(params) - 1:
            return activations, pre_activations, z
        pre_activations.append(z)
        out = np.maximum(z, 0.0)
        activations.append(out)
    raise AssertionError("unreachable")  # pragma: no cover


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def loss_and_gradient(w: WeightVector, data: Batch) -> tuple[float, np.ndarray]:
    """
    Mean cross-entropy over the batch and its exact gradient at w.

    Raises:
        DimensionError: if the batch does not match the architecture
    """
    data.check(w.arch)
    data = data.canonical()
    n = len(data)
    activations, pre_activations, logits = _forward(w, data.inputs)
    log_probs = _log_softmax(logits)
    rows = np.arange(n)
    value = math.fsum(-log_probs[rows, data.labels]) / n

    delta = np.exp(log_probs)
    delta[rows, data.labels] -= 1.0
    delta /= n

    grad = np.empty_like(w.values)
    params = w.params()
    for layer in reversed(w.arch.layers):
        grad[layer.start : layer.weight_stop] = (
            activations[layer.index].T @ delta
        ).ravel()
        grad[layer.weight_stop : layer.stop] = delta.sum(axis=0)
        if layer.index > 0:
            matrix, _ = params[layer.index]
            delta = (delta @ matrix.T) * (pre_activations[layer.index - 1] > 0.0)
    return value, grad


def loss(w: WeightVector, data: Batch) -> float:
    """Mean cross-entropy without the backward pass."""
    data.check(w.arch)
    data = data.canonical()
    _, _, logits = _forward(w, data.inputs)
    log_probs = _log_softmax(logits)
    return math.fsum(-log_probs[np.arange(len(data)), data.labels]) / len(data)


def predict(w: WeightVector, inputs: np.ndarray) -> np.ndarray:
    """Class index with the highest logit for every row (lowest index on ties)."""
    inputs = np.asarray(inputs, dtype=np.float64)
    if inputs.ndim != 2 or inputs.shape[1] != w.arch.n_inputs:
        raise DimensionError(
            f"inputs of shape {inputs.shape} do not fit architecture {w.arch}"
        )
    _, _, logits = _forward(w, inputs)
    return np.argmax(logits, axis=1)


def accuracy(w: WeightVector, data: Batch) -> float:
    """Fraction of rows whose predicted class equals the label."""
    data.check(w.arch)
    return float(np.count_nonzero(predict(w, data.inputs) == data.labels)) / len(data)
