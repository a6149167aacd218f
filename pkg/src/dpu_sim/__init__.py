"""
dpu-sim: weight-wise deep partial updating simulator.

Trains small multilayer perceptrons over rounds of growing data, selects
the most loss-relevant weights to push from server to edge, and accounts
for and encodes the resulting communication exactly.
"""

__version__ = "0.1.0"
