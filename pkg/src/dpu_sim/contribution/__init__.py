"""
Per-weight importance for partial updating.

Global contribution from the full-update displacement, local contribution
accumulated along the optimization path, and their normalized combination.
"""

from dpu_sim.contribution.diagnostics import (
    BoundReport,
    dump_contributions,
    smoothness_report,
)
from dpu_sim.contribution.metrics import (
    ContributionError,
    ContributionKind,
    ContributionVector,
    TraceState,
    accumulate_local,
    combine,
    global_contribution,
)

__all__ = [
    "BoundReport",
    "ContributionError",
    "ContributionKind",
    "ContributionVector",
    "TraceState",
    "accumulate_local",
    "combine",
    "dump_contributions",
    "global_contribution",
    "smoothness_report",
]
