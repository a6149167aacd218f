"""
Bootstrap utilities for dpu-sim.

Provides the experiment config template.
"""
