"""
Experiment configuration types.

Loading and validation from YAML lives in dpu_sim.utils.config; these
types only hold already-validated values.
"""

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from dpu_sim.nn.network import Architecture
from dpu_sim.nn.optim import OptimizerKind, OptimizerState, step_decay_schedule
from dpu_sim.rounds.data import SyntheticParams
from dpu_sim.rounds.policy import ReinitPolicy


class Method(str, Enum):
    DPU = "dpu"
    GCPU = "gcpu"
    RPU = "rpu"
    FU = "fu"


class FuInit(str, Enum):
    """Starting point of each full-updating round."""

    SAME_SEED = "same_seed"
    FRESH_SEED = "fresh_seed"
    PREVIOUS = "previous"


class SkipMode(str, Enum):
    """
    What happens when a candidate fails the validation gate.

    HOLD sends a skip frame and the server continues from the deployed
    weights. SEND still transmits the candidate for further training at the
    edge while the edge keeps serving the previously accepted weights.
    """

    HOLD = "hold"
    SEND = "send"


@dataclass(frozen=True)
class DataConfig:
    source: str = "synthetic"
    initial_size: int = 200
    delta_size: int = 200
    eval_size: int = 1000
    val_fraction: float = 0.3
    synthetic: SyntheticParams = field(default_factory=SyntheticParams)
    idx_images: Path | None = None
    idx_labels: Path | None = None


@dataclass(frozen=True)
class TrainingConfig:
    optimizer: OptimizerKind = OptimizerKind.ADAM
    learning_rate: float = 0.005
    momentum: float = 0.9
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    epochs: int = 30
    batch_size: int = 128
    decay_factor: float = 0.1
    decay_epochs: int | None = 10

    def optimizer_state(
        self, n_weights: int, batches_per_epoch: int, stretch: int = 1
    ) -> OptimizerState:
        """
        Optimizer for one phase of Q = epochs * batches_per_epoch iterations.

        stretch > 1 gives the table for stretch * Q iterations with the
        decay interval stretched by the same factor.
        """
        iterations = stretch * self.epochs * batches_per_epoch
        interval = (
            None
            if self.decay_epochs is None
            else stretch * self.decay_epochs * batches_per_epoch
        )
        schedule = step_decay_schedule(
            self.learning_rate, iterations, self.decay_factor, interval
        )
        hyper = {"momentum": self.momentum}
        if self.optimizer is OptimizerKind.ADAM:
            hyper = {"beta1": self.beta1, "beta2": self.beta2, "epsilon": self.epsilon}
        return OptimizerState.create(self.optimizer, schedule, n_weights, **hyper)


def _default_reinit() -> dict:
    return {Method.DPU: ReinitPolicy("doubling"), Method.GCPU: ReinitPolicy("never")}


@dataclass(frozen=True)
class UpdateConfig:
    methods: tuple[Method, ...] = (Method.DPU, Method.GCPU, Method.RPU, Method.FU)
    k: float = 0.1
    rounds: int = 8
    reinit: dict = field(default_factory=_default_reinit)
    fu_init: FuInit = FuInit.SAME_SEED
    skip_mode: SkipMode = SkipMode.HOLD

    def ratio(self, method: Method) -> float:
        """Updating ratio of a method; full updating always changes everything."""
        return 1.0 if method is Method.FU else self.k

    def reinit_policy(self, method: Method) -> ReinitPolicy:
        return self.reinit.get(method, ReinitPolicy("never"))


@dataclass(frozen=True)
class CostConfig:
    weight_bits: int = 32
    sample_bits: float | None = None
    nodes: int = 1


@dataclass(frozen=True)
class OutputConfig:
    packets: bool = True


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one experiment needs, for every method and seed it covers."""

    arch: Architecture
    data: DataConfig = field(default_factory=DataConfig)
    training: TrainingConfig = field(default_factory=TrainingConfig)
    update: UpdateConfig = field(default_factory=UpdateConfig)
    cost: CostConfig = field(default_factory=CostConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    seeds: tuple[int, ...] = (1,)
    source: Path | None = None

    @property
    def rounds(self) -> int:
        return self.update.rounds

    @property
    def sample_bits(self) -> float:
        """S_d; defaults to S_w bits per input feature."""
        if self.cost.sample_bits is not None:
            return self.cost.sample_bits
        return float(self.cost.weight_bits * self.arch.n_inputs)


CONFIG_VERSION = 1


def config_to_dict(config: ExperimentConfig) -> dict:
    """Plain-data form of a config, in the layout load_config reads."""
    data = config.data
    data_section = {
        "source": data.source,
        "initial_size": data.initial_size,
        "delta_size": data.delta_size,
        "eval_size": data.eval_size,
        "val_fraction": data.val_fraction,
    }
    if data.source == "idx":
        data_section["idx"] = {
            "images": str(data.idx_images),
            "labels": str(data.idx_labels),
        }
    else:
        blobs = data.synthetic
        data_section["synthetic"] = {
            "classes": blobs.classes,
            "dims": blobs.dims,
            "sigma": blobs.sigma,
            "spread": blobs.spread,
        }
    training = config.training
    update = config.update
    return {
        "version": CONFIG_VERSION,
        "model": {
            "layers": list(config.arch.layer_sizes),
            "activation": config.arch.activation,
        },
        "data": data_section,
        "training": {
            "optimizer": training.optimizer.value,
            "learning_rate": training.learning_rate,
            "momentum": training.momentum,
            "beta1": training.beta1,
            "beta2": training.beta2,
            "epsilon": training.epsilon,
            "epochs": training.epochs,
            "batch_size": training.batch_size,
            "decay_factor": training.decay_factor,
            "decay_epochs": training.decay_epochs,
        },
        "update": {
            "methods": [m.value for m in update.methods],
            "k": update.k,
            "rounds": update.rounds,
            "reinit": {m.value: str(p) for m, p in update.reinit.items()},
            "fu_init": update.fu_init.value,
            "skip_mode": update.skip_mode.value,
        },
        "cost": {
            "weight_bits": config.cost.weight_bits,
            "sample_bits": config.cost.sample_bits,
            "nodes": config.cost.nodes,
        },
        "output": {"packets": config.output.packets},
        "seeds": list(config.seeds),
    }
