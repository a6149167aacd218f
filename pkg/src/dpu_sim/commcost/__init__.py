"""
Communication cost model: index entropy, frame sizes and ratios to full updating.
"""

from dpu_sim.commcost.model import (
    COST_MODES,
    CostParams,
    breakeven_ratio,
    cumulative_ratio,
    entropy_table,
    index_entropy,
    node_ratio_curve,
    per_node_total_bits,
    server_to_edge_bits,
    upload_bits,
    write_rows_csv,
)

__all__ = [
    "COST_MODES",
    "CostParams",
    "breakeven_ratio",
    "cumulative_ratio",
    "entropy_table",
    "index_entropy",
    "node_ratio_curve",
    "per_node_total_bits",
    "server_to_edge_bits",
    "upload_bits",
    "write_rows_csv",
]
