# Tests for dpu-sim
