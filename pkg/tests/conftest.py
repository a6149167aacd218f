"""
Shared fixtures for dpu-sim tests.

Factories build small networks, batches and configs so individual tests
stay fast and deterministic.
"""

from dataclasses import replace

import numpy as np
import pytest

from dpu_sim.nn.network import Architecture, Batch, WeightVector, init_weights
from dpu_sim.rounds.config import (
    CostConfig,
    DataConfig,
    ExperimentConfig,
    OutputConfig,
    TrainingConfig,
    UpdateConfig,
)
from dpu_sim.rounds.data import SyntheticParams

SMALL_CONFIG_YAML = """\
version: 1
model:
  layers: [2, 8, 3]
data:
  source: synthetic
  initial_size: 30
  delta_size: 30
  eval_size: 60
  synthetic:
    sigma: 0.3
    spread: 0.5
training:
  optimizer: adam
  learning_rate: 0.01
  epochs: 2
  batch_size: 16
  decay_epochs: 1
update:
  methods: [dpu, gcpu, rpu, fu]
  k: 0.2
  rounds: 3
cost:
  weight_bits: 32
output:
  packets: true
seeds: [1, 2]
"""


@pytest.fixture
def make_arch():
    """Factory fixture to create architectures."""

    def _create(*layers: int) -> Architecture:
        return Architecture(layers or (4, 8, 8, 3))

    return _create


@pytest.fixture
def make_batch():
    """Factory fixture to create random labeled batches."""

    def _create(arch: Architecture, size: int = 16, seed: int = 0) -> Batch:
        rng = np.random.default_rng(seed)
        inputs = rng.normal(size=(size, arch.n_inputs))
        labels = rng.integers(0, arch.n_classes, size=size)
        return Batch(inputs, labels)

    return _create


@pytest.fixture
def make_weights():
    """Factory fixture to create weight vectors (initialized or random normal)."""

    def _create(arch: Architecture, seed: int = 0, scale: float | None = None) -> WeightVector:
        if scale is None:
            return init_weights(arch, seed)
        rng = np.random.default_rng(seed)
        return WeightVector(rng.normal(scale=scale, size=arch.n_weights), arch)

    return _create


@pytest.fixture
def small_config():
    """Factory fixture for a tiny synthetic experiment config."""

    def _create(**update_fields) -> ExperimentConfig:
        config = ExperimentConfig(
            arch=Architecture((2, 8, 3)),
            data=DataConfig(
                initial_size=30,
                delta_size=30,
                eval_size=60,
                synthetic=SyntheticParams(classes=3, dims=2, sigma=0.3, spread=0.5),
            ),
            training=TrainingConfig(
                learning_rate=0.01, epochs=2, batch_size=16, decay_epochs=1
            ),
            update=UpdateConfig(k=0.2, rounds=3),
            cost=CostConfig(weight_bits=32),
            output=OutputConfig(packets=True),
            seeds=(1, 2),
        )
        if update_fields:
            config = replace(config, update=replace(config.update, **update_fields))
        return config

    return _create


@pytest.fixture
def config_file(tmp_path):
    """Factory fixture writing a config document to disk."""

    def _create(text: str = SMALL_CONFIG_YAML, name: str = "config.yaml"):
        path = tmp_path / name
        path.write_text(text)
        return path

    return _create
