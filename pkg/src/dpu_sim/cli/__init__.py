"""
CLI tools for dpu-sim.

Entry points:
    - dpu-sim: umbrella command with the subcommands below and init
    - dpu-sim-run: Run experiments, write CSVs, frames and a summary
    - dpu-sim-cost: Tabulate the communication cost model
    - dpu-sim-ablate-rewind: Compare rewinding metrics on one full update
    - dpu-sim-dump-packet: Decode and print update frames
"""
