#!/usr/bin/env python3
"""
Generate a documented experiment config.

Outputs the desk-scale fixture config that dpu-sim run accepts.
"""

import sys

CONFIG_TEMPLATE = """# Generated by dpu-sim-init
# Desk-scale experiment: 3-class Gaussian blobs, 8 rounds, k = 0.1.
# Run with: dpu-sim run --config fixture.yaml --out results/

version: 1

model:
  # input dim, hidden layers..., classes (ReLU MLP, softmax output)
  layers: [2, 32, 32, 3]

data:
  source: synthetic        # synthetic | idx
  initial_size: 200        # |D^1|
  delta_size: 200          # new samples uploaded per round
  eval_size: 1000          # held-out pool: 30% validation, rest test
  val_fraction: 0.3
  synthetic:
    classes: 3
    dims: 2
    sigma: 0.3             # blob noise
    spread: 0.5            # circumradius of the simplex of class means
  # idx:                   # used when source is idx, relative to this file
  #   images: train-images-idx3-ubyte.gz
  #   labels: train-labels-idx1-ubyte.gz

training:
  optimizer: adam          # sgd | nesterov_sgd | adam
  learning_rate: 0.0003   # small enough that no method saturates in one round
  epochs: 30               # Q = epochs * ceil(|D^r| / batch_size)
  batch_size: 128
  decay_factor: 0.1
  decay_epochs: 10         # null keeps the rate fixed

update:
  methods: [dpu, gcpu, rpu, fu]
  k: 0.1                   # fraction of weights changed per round
  rounds: 8
  reinit:
    dpu: doubling          # doubling | never | every:n
    gcpu: never
  fu_init: same_seed       # same_seed | fresh_seed | previous
  skip_mode: hold          # hold: skip frame on rejection; send: transmit anyway

cost:
  weight_bits: 32          # S_w: 16 | 32 | 64
  sample_bits: null        # S_d; null means weight_bits per input feature
  nodes: 1                 # N

output:
  packets: true            # keep every emitted frame as round-NNN.bin

seeds: 1..5
"""


def main() -> int:
    """Output config template to stdout."""
    print(CONFIG_TEMPLATE, end="")
    return 0


if __name__ == "__main__":
    sys.exit(main())
