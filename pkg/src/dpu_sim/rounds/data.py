"""
Data sources for multi-round experiments.

The pool of samples is split once: the first |D^1| + (R - 1) * |dD| samples
form the training stream that is revealed round by round, the rest is the
evaluation pool, of which a fixed fraction is the validation set and the
remainder the test set.
"""

import gzip
import logging
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from dpu_sim.nn.network import Batch
from dpu_sim.rounds.seeds import DATA, SHUFFLE, derive_seed, substream

log = logging.getLogger(__name__)

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801


@dataclass(frozen=True)
class SyntheticParams:
    """
    Gaussian blobs around class means.

    With dims >= C - 1 the class means are the vertices of a regular simplex
    centred at the origin with circumradius spread, spanning the first C - 1
    dimensions. With fewer dimensions they fall back to a circle of radius
    spread in the first two dimensions, or to spread * (c - (C - 1) / 2) on
    the line when there is only one.
    """

    classes: int = 3
    dims: int = 2
    sigma: float = 0.3
    spread: float = 0.5

    def __post_init__(self):
        if self.classes < 2:
            raise ValueError(f"need at least 2 classes, got {self.classes}")
        if self.dims < 1:
            raise ValueError(f"need at least 1 dimension, got {self.dims}")
        if self.sigma < 0:
            raise ValueError(f"sigma must be non-negative, got {self.sigma}")
        if self.spread <= 0:
            raise ValueError(f"spread must be positive, got {self.spread}")

    def class_means(self) -> np.ndarray:
        means = np.zeros((self.classes, self.dims))
        c = np.arange(self.classes)
        if self.dims >= self.classes - 1:
            # Helmert rows: orthonormal and orthogonal to the all-ones vector
            for j in range(1, self.classes):
                row = np.where(c < j, 1.0, 0.0)
                row[j] = -j
                means[:, j - 1] = row / math.sqrt(j * (j + 1))
            means *= self.spread / math.sqrt(1.0 - 1.0 / self.classes)
        elif self.dims == 1:
            means[:, 0] = self.spread * (c - (self.classes - 1) / 2)
        else:
            angle = 2.0 * np.pi * c / self.classes
            means[:, 0] = self.spread * np.cos(angle)
            means[:, 1] = self.spread * np.sin(angle)
        return means


def generate_synthetic(params: SyntheticParams, n_samples: int, seed: int) -> Batch:
    """
    Stratified Gaussian blobs in shuffled order.

    Every class gets n_samples // C samples; the first n_samples % C
    classes get one more.
    """
    if n_samples < 1:
        raise ValueError(f"need at least one sample, got {n_samples}")
    rng = np.random.default_rng(seed)
    base, extra = divmod(n_samples, params.classes)
    counts = [base + (1 if c < extra else 0) for c in range(params.classes)]
    labels = np.repeat(np.arange(params.classes), counts)
    noise = rng.normal(0.0, 1.0, size=(n_samples, params.dims))
    inputs = params.class_means()[labels] + params.sigma * noise
    order = rng.permutation(n_samples)
    return Batch(inputs[order], labels[order])


def _read_idx(path: Path) -> bytes:
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(2)
    opener = gzip.open if head == b"\x1f\x8b" else open
    with opener(path, "rb") as fh:
        return fh.read()


def load_idx_images(path: Path) -> np.ndarray:
    """Images as float64 rows scaled to [0, 1], one flattened image per row."""
    raw = _read_idx(path)
    if len(raw) < 16:
        raise ValueError(f"{path}: too short for an IDX image header")
    magic, count, rows, cols = struct.unpack_from(">IIII", raw)
    if magic != IDX_IMAGES_MAGIC:
        raise ValueError(f"{path}: magic {magic:#010x}, expected {IDX_IMAGES_MAGIC:#010x}")
    pixels = np.frombuffer(raw, dtype=np.uint8, offset=16)
    if pixels.shape[0] != count * rows * cols:
        raise ValueError(
            f"{path}: {pixels.shape[0]} pixel bytes for {count} images of {rows}x{cols}"
        )
    return pixels.reshape(count, rows * cols).astype(np.float64) / 255.0


def load_idx_labels(path: Path) -> np.ndarray:
    raw = _read_idx(path)
    if len(raw) < 8:
        raise ValueError(f"{path}: too short for an IDX label header")
    magic, count = struct.unpack_from(">II", raw)
    if magic != IDX_LABELS_MAGIC:
        raise ValueError(f"{path}: magic {magic:#010x}, expected {IDX_LABELS_MAGIC:#010x}")
    labels = np.frombuffer(raw, dtype=np.uint8, offset=8)
    if labels.shape[0] != count:
        raise ValueError(f"{path}: {labels.shape[0]} labels, header says {count}")
    return labels.astype(np.int64)


def load_idx_pool(images: Path, labels: Path, seed: int) -> Batch:
    """Load an IDX image/label pair and shuffle it with the given seed."""
    inputs = load_idx_images(images)
    targets = load_idx_labels(labels)
    if inputs.shape[0] != targets.shape[0]:
        raise ValueError(
            f"{images} has {inputs.shape[0]} images but {labels} has {targets.shape[0]} labels"
        )
    order = np.random.default_rng(seed).permutation(inputs.shape[0])
    return Batch(inputs[order], targets[order])


class DataStream:
    """
    Growing training set D^r plus fixed validation and test sets.

    D^r = D^{r-1} united with dD^r, so |D^r| = |D^1| + (r - 1) * |dD|.
    """

    def __init__(
        self,
        pool: Batch,
        initial_size: int,
        delta_size: int,
        rounds: int,
        eval_size: int,
        val_fraction: float = 0.3,
    ):
        if initial_size < 1 or delta_size < 0 or rounds < 1:
            raise ValueError(
                f"invalid stream sizes: |D1|={initial_size}, |dD|={delta_size}, R={rounds}"
            )
        if not 0 < val_fraction < 1:
            raise ValueError(f"validation fraction must be in (0, 1), got {val_fraction}")
        train_total = initial_size + (rounds - 1) * delta_size
        if len(pool) < train_total + eval_size:
            raise ValueError(
                f"pool of {len(pool)} samples cannot supply {train_total} training "
                f"and {eval_size} evaluation samples"
            )
        n_val = math.floor(val_fraction * eval_size + 0.5)
        if n_val < 1 or n_val >= eval_size:
            raise ValueError(f"evaluation pool of {eval_size} leaves no validation or test set")

        self.initial_size = initial_size
        self.delta_size = delta_size
        self.rounds = rounds
        self._train = Batch(pool.inputs[:train_total], pool.labels[:train_total])
        evaluation = slice(train_total, train_total + eval_size)
        eval_inputs = pool.inputs[evaluation]
        eval_labels = pool.labels[evaluation]
        self.validation = Batch(eval_inputs[:n_val], eval_labels[:n_val])
        self.test = Batch(eval_inputs[n_val:], eval_labels[n_val:])

    def size(self, round_index: int) -> int:
        """|D^r|."""
        if not 1 <= round_index <= self.rounds:
            raise ValueError(f"round {round_index} outside 1..{self.rounds}")
        return self.initial_size + (round_index - 1) * self.delta_size

    def new_samples(self, round_index: int) -> int:
        """Samples uploaded by the edge before round r; none before round 1."""
        return 0 if round_index == 1 else self.delta_size

    def training_set(self, round_index: int) -> Batch:
        n = self.size(round_index)
        return Batch(self._train.inputs[:n], self._train.labels[:n])


class MinibatchSchedule:
    """
    Minibatches of D^r, reshuffled every epoch.

    The permutation of epoch e is drawn from the "shuffle" substream of
    (master seed, round, e), so a phase restarting at q = 1 sees the same
    batches again.
    """

    def __init__(self, data: Batch, batch_size: int, master_seed: int, round_index: int):
        if batch_size < 1:
            raise ValueError(f"batch size must be positive, got {batch_size}")
        self.data = data
        self.batch_size = batch_size
        self.master_seed = master_seed
        self.round_index = round_index
        self.batches_per_epoch = math.ceil(len(data) / batch_size)
        self._permutations: dict[int, np.ndarray] = {}

    def iterations(self, epochs: int) -> int:
        """Q = epochs * ceil(|D^r| / batch size)."""
        return epochs * self.batches_per_epoch

    def _permutation(self, epoch: int) -> np.ndarray:
        if epoch not in self._permutations:
            rng = substream(self.master_seed, SHUFFLE, self.round_index, epoch)
            self._permutations[epoch] = rng.permutation(len(self.data))
        return self._permutations[epoch]

    def batch(self, q: int) -> Batch:
        epoch, position = divmod(q - 1, self.batches_per_epoch)
        start = position * self.batch_size
        rows = self._permutation(epoch)[start : start + self.batch_size]
        return Batch(self.data.inputs[rows], self.data.labels[rows])

    def full(self) -> Batch:
        return self.data


def data_seed(master_seed: int) -> int:
    return derive_seed(master_seed, DATA)
