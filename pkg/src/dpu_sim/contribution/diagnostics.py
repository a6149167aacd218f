"""
Offline inspection helpers for contribution vectors.
"""

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from dpu_sim.contribution.metrics import ContributionVector
from dpu_sim.nn.network import Batch, WeightVector, loss, loss_and_gradient

log = logging.getLogger(__name__)


def dump_contributions(
    path: str | Path,
    c_global: ContributionVector,
    c_local: ContributionVector,
    c_combined: ContributionVector,
) -> Path:
    """Write index, c_global, c_local, c_combined as whitespace-separated columns."""
    n = len(c_global)
    if len(c_local) != n or len(c_combined) != n:
        raise ValueError("contribution vectors must have equal length")
    path = Path(path)
    table = np.column_stack(
        [np.arange(n), c_global.values, c_local.values, c_combined.values]
    )
    np.savetxt(
        path,
        table,
        fmt=["%d", "%.17g", "%.17g", "%.17g"],
        header="index c_global c_local c_combined",
        comments="",
    )
    log.debug(f"wrote {n} contribution rows to {path}")
    return path


@dataclass(frozen=True)
class BoundReport:
    """Rewound loss gap against (L/2) * ||delta_f * (1 - m)||^2 for an empirical L."""

    loss_full: float
    loss_rewound: float
    lipschitz: float
    rewound_norm_sq: float

    @property
    def loss_gap(self) -> float:
        return self.loss_rewound - self.loss_full

    @property
    def bound(self) -> float:
        return 0.5 * self.lipschitz * self.rewound_norm_sq

    @property
    def holds(self) -> bool:
        return self.loss_gap <= self.bound


def smoothness_report(
    w: WeightVector,
    w_f: WeightVector,
    mask: np.ndarray,
    data: Batch,
    samples: int = 8,
) -> BoundReport:
    """
    Estimate a gradient Lipschitz constant and evaluate the rewinding bound.

    L is the largest ||g(x) - g(y)|| / ||x - y|| over neighbouring points on
    the segment w -> w_f and the pair (rewound, w_f). It is a lower estimate
    of the true constant, so the report is informational.
    """
    w.require_same_arch(w_f)
    mask = np.asarray(mask, dtype=bool)
    rewound = WeightVector(np.where(mask, w_f.values, w.values), w.arch)
    delta = w_f.values - w.values

    points = [w.values + t * delta for t in np.linspace(0.0, 1.0, max(samples, 2))]
    points.append(rewound.values)
    grads = [loss_and_gradient(WeightVector(p, w.arch), data)[1] for p in points]
    pairs = [(i, i + 1) for i in range(len(points) - 2)] + [(len(points) - 1, len(points) - 2)]

    lipschitz = 0.0
    for a, b in pairs:
        distance = float(np.linalg.norm(points[a] - points[b]))
        if distance > 0.0:
            lipschitz = max(lipschitz, float(np.linalg.norm(grads[a] - grads[b])) / distance)

    frozen = delta[~mask]
    report = BoundReport(
        loss_full=loss(w_f, data),
        loss_rewound=loss(rewound, data),
        lipschitz=lipschitz,
        rewound_norm_sq=float(frozen @ frozen),
    )
    log.debug(
        f"bound check: gap={report.loss_gap:.4g} bound={report.bound:.4g} L~{lipschitz:.4g}"
    )
    return report
