"""
Analytical server-to-edge and per-node communication cost.

Bits are the unit throughout; bytes appear only where actual frames are
counted (RoundLog.bytes_sent).
"""

import csv
import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

from dpu_sim.codec.packet import SKIP_FRAME_BYTES

log = logging.getLogger(__name__)

COST_MODES = ("server_to_edge", "total")


class CostedRound(Protocol):
    """The parts of a round log the cost model reads."""

    bytes_sent: int
    new_samples: int


@dataclass(frozen=True)
class CostParams:
    """
    Cost model parameters.

    Attributes:
        n_weights: I, number of weights
        weight_bits: S_w, bits per transmitted weight
        sample_bits: S_d, bits per uploaded training sample
        nodes: N, number of edge nodes sharing the upload
    """

    n_weights: int
    weight_bits: int = 32
    sample_bits: float = 32.0
    nodes: int = 1

    def __post_init__(self):
        for name in ("n_weights", "weight_bits", "sample_bits", "nodes"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")

    @property
    def full_bits(self) -> float:
        return float(self.weight_bits * self.n_weights)


def index_entropy(k: float) -> float:
    """Binary entropy of the mask bits in base 2; 0 at both endpoints."""
    if not 0.0 <= k <= 1.0:
        raise ValueError(f"ratio k must be in [0, 1], got {k}")
    if k == 0.0 or k == 1.0:
        return 0.0
    return -(k * math.log2(k) + (1.0 - k) * math.log2(1.0 - k))


def server_to_edge_bits(k: float, params: CostParams, frame: str = "sparse") -> float:
    """
    Model size of one server-to-edge transmission.

    Args:
        k: updating ratio
        params: cost parameters
        frame: "sparse" for S_w*k*I + S_x(k)*I, "full" for S_w*I,
            "skip" for the actual skip frame size

    Returns:
        size in bits
    """
    if frame == "full":
        return params.full_bits
    if frame == "skip":
        return float(SKIP_FRAME_BYTES * 8)
    if frame != "sparse":
        raise ValueError(f"unknown frame kind {frame!r}")
    return params.weight_bits * k * params.n_weights + index_entropy(k) * params.n_weights


def breakeven_ratio(params: CostParams) -> float:
    """Largest k for which sparse frames beat full frames at worst-case S_x = 1."""
    return (params.weight_bits - 1) / params.weight_bits


def upload_bits(new_samples: int, params: CostParams) -> float:
    """One node's share of uploading the round's new samples."""
    return params.sample_bits * new_samples / params.nodes


def per_node_total_bits(round_log: CostedRound, params: CostParams) -> float:
    """Upload share plus the server-to-edge bytes actually sent that round."""
    return upload_bits(round_log.new_samples, params) + 8 * round_log.bytes_sent


def _round_bits(round_log: CostedRound, mode: str, params: CostParams | None) -> float:
    if mode == "server_to_edge":
        return 8.0 * round_log.bytes_sent
    if mode == "total":
        if params is None:
            raise ValueError("total cost mode needs cost parameters")
        return per_node_total_bits(round_log, params)
    raise ValueError(f"cost mode must be one of {COST_MODES}, got {mode!r}")


def cumulative_ratio(
    logs_method: Sequence[CostedRound],
    logs_fu: Sequence[CostedRound],
    mode: str = "server_to_edge",
    params: CostParams | None = None,
) -> float:
    """Cost of a method over all rounds divided by the full-updating cost."""
    if len(logs_method) != len(logs_fu):
        raise ValueError(
            f"round count mismatch: {len(logs_method)} vs {len(logs_fu)} full-update rounds"
        )
    if not logs_fu:
        raise ValueError("no rounds to compare")
    method = math.fsum(_round_bits(entry, mode, params) for entry in logs_method)
    reference = math.fsum(_round_bits(entry, mode, params) for entry in logs_fu)
    return method / reference


def node_ratio_curve(
    params: CostParams,
    k: float,
    rounds: int,
    delta_size: int,
    nodes: Iterable[int],
) -> list[tuple[int, float]]:
    """
    Closed-form total-cost ratio of sparse over full updating per node count.

    Round 1 uploads nothing new; every later round uploads delta_size
    samples shared across N nodes.
    """
    if rounds < 1:
        raise ValueError(f"rounds must be at least 1, got {rounds}")
    sparse = server_to_edge_bits(k, params)
    curve = []
    for n in nodes:
        if n < 1:
            raise ValueError(f"node count must be at least 1, got {n}")
        upload = (rounds - 1) * params.sample_bits * delta_size / n
        ratio = (upload + rounds * sparse) / (upload + rounds * params.full_bits)
        curve.append((n, ratio))
    return curve


def entropy_table(ks: Sequence[float], params: CostParams) -> list[dict]:
    """Rows of k, S_x(k), sparse frame bits and the ratio to a full frame."""
    if not ks:
        raise ValueError("empty k list")
    rows = []
    for k in ks:
        bits = server_to_edge_bits(k, params)
        rows.append(
            {
                "k": k,
                "index_entropy": index_entropy(k),
                "bits": bits,
                "ratio_to_full": bits / params.full_bits,
            }
        )
    return rows


def write_rows_csv(path: Path, rows: Sequence[dict]) -> None:
    """Write dict rows with the keys of the first row as header."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]) if rows else [])
        writer.writeheader()
        writer.writerows(rows)
    log.debug(f"wrote {len(rows)} rows to {path}")
