"""
Experiment config loading and command-line list parsing.

Configs are YAML documents with a required `version: 1` and the sections
model, data, training, update, cost, output and seeds. Every field is
validated; errors name the file, the 1-based line and the dotted field:

    fixture.yaml:12: update.k: must be in (0, 1], got 1.5
"""

from pathlib import Path
from typing import Any

import yaml

from dpu_sim.nn.network import Architecture, DimensionError
from dpu_sim.nn.optim import OptimizerKind
from dpu_sim.rounds.config import (
    CONFIG_VERSION,
    CostConfig,
    DataConfig,
    ExperimentConfig,
    FuInit,
    Method,
    OutputConfig,
    SkipMode,
    TrainingConfig,
    UpdateConfig,
)
from dpu_sim.rounds.data import SyntheticParams
from dpu_sim.rounds.policy import ReinitPolicy

SECTIONS = ("version", "model", "data", "training", "update", "cost", "output", "seeds")
VALUE_BITS = (16, 32, 64)
DATA_KEYS = (
    "source",
    "initial_size",
    "delta_size",
    "eval_size",
    "val_fraction",
    "synthetic",
    "idx",
)
TRAINING_KEYS = (
    "optimizer",
    "learning_rate",
    "momentum",
    "beta1",
    "beta2",
    "epsilon",
    "epochs",
    "batch_size",
    "decay_factor",
    "decay_epochs",
)


class ConfigError(ValueError):
    """Invalid config, located by file, line and dotted field path."""

    def __init__(
        self,
        message: str,
        source: str | Path | None = None,
        field: str | None = None,
        line: int | None = None,
    ):
        self.message = message
        self.source = source
        self.field = field
        self.line = line
        super().__init__(str(self))

    def __str__(self) -> str:
        location = ""
        if self.source is not None:
            location = f"{self.source}:{self.line}: " if self.line else f"{self.source}: "
        elif self.line:
            location = f"line {self.line}: "
        field = f"{self.field}: " if self.field else ""
        return f"{location}{field}{self.message}"


def parse_int_list(text: str) -> list[int]:
    """Parse "1..5" (inclusive) or "1,3,7" into integers."""
    text = str(text).strip()
    if not text:
        raise ValueError("empty list")
    try:
        if ".." in text:
            low, high = (int(part) for part in text.split("..", 1))
            if high < low:
                raise ValueError(f"empty range {text!r}")
            return list(range(low, high + 1))
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        if "range" in str(e):
            raise
        raise ValueError(f"not an integer list or range: {text!r}") from None


def parse_seeds(text: str) -> tuple[int, ...]:
    """Non-negative, distinct seeds from "1..5" or "1,3,7"."""
    seeds = parse_int_list(text)
    if not seeds:
        raise ValueError("no seeds given")
    if any(s < 0 for s in seeds):
        raise ValueError(f"seeds must be non-negative: {text!r}")
    if len(set(seeds)) != len(seeds):
        raise ValueError(f"duplicate seeds in {text!r}")
    return tuple(seeds)


def parse_methods(text: str) -> tuple[Method, ...]:
    """Methods from "dpu,fu"; case-insensitive, order kept, duplicates dropped."""
    methods: list[Method] = []
    for part in str(text).split(","):
        name = part.strip().lower()
        if not name:
            continue
        try:
            method = Method(name)
        except ValueError:
            valid = ", ".join(m.value for m in Method)
            raise ValueError(f"unknown method {name!r} (valid: {valid})") from None
        if method not in methods:
            methods.append(method)
    if not methods:
        raise ValueError("no methods given")
    return tuple(methods)


def parse_float_list(text: str) -> list[float]:
    values = []
    for part in str(text).split(","):
        if not part.strip():
            continue
        try:
            values.append(float(part))
        except ValueError:
            raise ValueError(f"not a number: {part.strip()!r}") from None
    if not values:
        raise ValueError("empty list")
    return values


def _line_index(node: yaml.Node, prefix: str = "") -> dict[str, int]:
    index: dict[str, int] = {}
    if isinstance(node, yaml.MappingNode):
        for key_node, value_node in node.value:
            dotted = f"{prefix}.{key_node.value}" if prefix else str(key_node.value)
            index[dotted] = key_node.start_mark.line + 1
            index.update(_line_index(value_node, dotted))
    elif isinstance(node, yaml.SequenceNode):
        for i, item in enumerate(node.value):
            dotted = f"{prefix}[{i}]"
            index[dotted] = item.start_mark.line + 1
            index.update(_line_index(item, dotted))
    return index


class _Loader:
    """Validates one parsed document against the config schema."""

    def __init__(self, source: str | Path | None, lines: dict[str, int]):
        self.source = source
        self.lines = lines

    def error(self, field: str, message: str) -> ConfigError:
        located = field
        while located and located not in self.lines:
            located = located.rpartition(".")[0]
        return ConfigError(message, self.source, field, self.lines.get(located))

    def section(self, data: dict, name: str, allowed: tuple[str, ...]) -> dict:
        value = data.get(name.rpartition(".")[2])
        if value is None:
            return {}
        if not isinstance(value, dict):
            raise self.error(name, f"must be a mapping, got {type(value).__name__}")
        for key in value:
            if key not in allowed:
                raise self.error(
                    f"{name}.{key}", f"unknown key (allowed: {', '.join(allowed)})"
                )
        return value

    def integer(
        self,
        data: dict,
        field: str,
        default: Any,
        minimum: int | None = None,
        nullable: bool = False,
    ):
        value = data.get(field.rpartition(".")[2], default)
        if value is None and nullable:
            return None
        if isinstance(value, bool) or not isinstance(value, int):
            raise self.error(field, f"must be an integer, got {value!r}")
        if minimum is not None and value < minimum:
            raise self.error(field, f"must be >= {minimum}, got {value}")
        return value

    def number(
        self,
        data: dict,
        field: str,
        default: Any,
        low: float | None = None,
        high: float | None = None,
        low_open: bool = False,
        high_open: bool = False,
    ):
        value = data.get(field.rpartition(".")[2], default)
        if value is None and default is None:
            return None
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise self.error(field, f"must be a number, got {value!r}")
        value = float(value)
        too_low = low is not None and (value <= low if low_open else value < low)
        too_high = high is not None and (value >= high if high_open else value > high)
        if too_low or too_high:
            left = "(" if low_open else "["
            right = ")" if high_open else "]"
            lo = "-inf" if low is None else f"{low:g}"
            hi = "inf" if high is None else f"{high:g}"
            raise self.error(field, f"must be in {left}{lo}, {hi}{right}, got {value:g}")
        return value

    def choice(self, data: dict, field: str, default: Any, enum):
        value = data.get(field.rpartition(".")[2], default)
        try:
            return enum(str(value).lower())
        except ValueError:
            valid = ", ".join(e.value for e in enum)
            raise self.error(field, f"must be one of {valid}, got {value!r}") from None

    def model(self, data: dict) -> Architecture:
        model = self.section(data, "model", ("layers", "activation"))
        layers = model.get("layers")
        if not isinstance(layers, list) or len(layers) < 2:
            raise self.error("model.layers", "must be a list of at least 2 layer sizes")
        for i, size in enumerate(layers):
            if isinstance(size, bool) or not isinstance(size, int) or size < 1:
                raise self.error(f"model.layers[{i}]", f"must be a positive integer, got {size!r}")
        try:
            return Architecture(tuple(layers), model.get("activation", "relu"))
        except (DimensionError, ValueError) as e:
            raise self.error("model.activation", str(e)) from None

    def data(self, data: dict, arch: Architecture) -> DataConfig:
        section = self.section(data, "data", DATA_KEYS)
        source = str(section.get("source", "synthetic"))
        if source not in ("synthetic", "idx"):
            raise self.error("data.source", f"must be synthetic or idx, got {source!r}")
        defaults = DataConfig()
        blobs = self.section(section, "data.synthetic", ("classes", "dims", "sigma", "spread"))
        synthetic = SyntheticParams(
            classes=self.integer(blobs, "data.synthetic.classes", arch.n_classes, 2),
            dims=self.integer(blobs, "data.synthetic.dims", arch.n_inputs, 1),
            sigma=self.number(blobs, "data.synthetic.sigma", 0.3, low=0.0),
            spread=self.number(blobs, "data.synthetic.spread", 0.5, low=0.0, low_open=True),
        )
        if source == "synthetic":
            if synthetic.classes != arch.n_classes:
                raise self.error(
                    "data.synthetic.classes",
                    f"{synthetic.classes} classes but model has {arch.n_classes} outputs",
                )
            if synthetic.dims != arch.n_inputs:
                raise self.error(
                    "data.synthetic.dims",
                    f"{synthetic.dims} dimensions but model has {arch.n_inputs} inputs",
                )

        idx = self.section(section, "data.idx", ("images", "labels"))
        images = labels = None
        if source == "idx":
            base = Path(self.source).parent if self.source else Path(".")
            for key in ("images", "labels"):
                if not isinstance(idx.get(key), str):
                    raise self.error(f"data.idx.{key}", "path required when source is idx")
            images = base / idx["images"]
            labels = base / idx["labels"]

        return DataConfig(
            source=source,
            initial_size=self.integer(section, "data.initial_size", defaults.initial_size, 1),
            delta_size=self.integer(section, "data.delta_size", defaults.delta_size, 0),
            eval_size=self.integer(section, "data.eval_size", defaults.eval_size, 2),
            val_fraction=self.number(
                section, "data.val_fraction", defaults.val_fraction, 0.0, 1.0, True, True
            ),
            synthetic=synthetic,
            idx_images=images,
            idx_labels=labels,
        )

    def training(self, data: dict) -> TrainingConfig:
        d = TrainingConfig()
        s = self.section(data, "training", TRAINING_KEYS)

        def unit(name: str) -> float:
            return self.number(
                s, f"training.{name}", getattr(d, name), 0.0, 1.0, high_open=True
            )

        def positive(name: str) -> float:
            return self.number(s, f"training.{name}", getattr(d, name), 0.0, low_open=True)

        return TrainingConfig(
            optimizer=self.choice(s, "training.optimizer", d.optimizer.value, OptimizerKind),
            learning_rate=positive("learning_rate"),
            momentum=unit("momentum"),
            beta1=unit("beta1"),
            beta2=unit("beta2"),
            epsilon=positive("epsilon"),
            epochs=self.integer(s, "training.epochs", d.epochs, 1),
            batch_size=self.integer(s, "training.batch_size", d.batch_size, 1),
            decay_factor=self.number(
                s, "training.decay_factor", d.decay_factor, 0.0, 1.0, low_open=True
            ),
            decay_epochs=self.integer(
                s, "training.decay_epochs", d.decay_epochs, 1, nullable=True
            ),
        )

    def reinit(self, value: Any) -> dict:
        policies = UpdateConfig().reinit.copy()
        if value is None:
            return policies
        if not isinstance(value, dict):
            value = {Method.DPU.value: value}
        for key, text in value.items():
            field = f"update.reinit.{key}"
            if key not in (Method.DPU.value, Method.GCPU.value):
                raise self.error(field, "re-initialization applies to dpu and gcpu only")
            try:
                policies[Method(key)] = ReinitPolicy.parse(text)
            except ValueError as e:
                raise self.error(field, str(e)) from None
        return policies

    def update(self, data: dict) -> UpdateConfig:
        d = UpdateConfig()
        s = self.section(
            data, "update", ("methods", "k", "rounds", "reinit", "fu_init", "skip_mode")
        )
        methods = s.get("methods", [m.value for m in d.methods])
        if isinstance(methods, list):
            methods = ",".join(str(m) for m in methods)
        try:
            methods = parse_methods(methods)
        except ValueError as e:
            raise self.error("update.methods", str(e)) from None
        return UpdateConfig(
            methods=methods,
            k=self.number(s, "update.k", d.k, 0.0, 1.0, low_open=True),
            rounds=self.integer(s, "update.rounds", d.rounds, 1),
            reinit=self.reinit(s.get("reinit")),
            fu_init=self.choice(s, "update.fu_init", d.fu_init.value, FuInit),
            skip_mode=self.choice(s, "update.skip_mode", d.skip_mode.value, SkipMode),
        )

    def cost(self, data: dict) -> CostConfig:
        d = CostConfig()
        s = self.section(data, "cost", ("weight_bits", "sample_bits", "nodes"))
        weight_bits = self.integer(s, "cost.weight_bits", d.weight_bits)
        if weight_bits not in VALUE_BITS:
            raise self.error("cost.weight_bits", f"must be one of 16, 32, 64, got {weight_bits}")
        return CostConfig(
            weight_bits=weight_bits,
            sample_bits=self.number(s, "cost.sample_bits", None, 0.0, low_open=True),
            nodes=self.integer(s, "cost.nodes", d.nodes, 1),
        )

    def output(self, data: dict) -> OutputConfig:
        s = self.section(data, "output", ("packets",))
        packets = s.get("packets", True)
        if not isinstance(packets, bool):
            raise self.error("output.packets", f"must be true or false, got {packets!r}")
        return OutputConfig(packets=packets)

    def seeds(self, data: dict) -> tuple[int, ...]:
        value = data.get("seeds", [1])
        if isinstance(value, int) and not isinstance(value, bool):
            value = [value]
        if isinstance(value, list):
            value = ",".join(str(v) for v in value)
        try:
            return parse_seeds(str(value))
        except ValueError as e:
            raise self.error("seeds", str(e)) from None

    def load(self, data: Any) -> ExperimentConfig:
        if not isinstance(data, dict):
            raise ConfigError("config must be a mapping", self.source)
        for key in data:
            if key not in SECTIONS:
                raise self.error(str(key), f"unknown section (allowed: {', '.join(SECTIONS)})")
        if "version" not in data:
            raise ConfigError("missing required key", self.source, "version")
        if data["version"] != CONFIG_VERSION:
            raise self.error(
                "version",
                f"unsupported config version {data['version']!r}, expected {CONFIG_VERSION}",
            )
        arch = self.model(data)
        return ExperimentConfig(
            arch=arch,
            data=self.data(data, arch),
            training=self.training(data),
            update=self.update(data),
            cost=self.cost(data),
            output=self.output(data),
            seeds=self.seeds(data),
            source=Path(self.source) if self.source else None,
        )


def load_config_text(text: str, source: str | Path | None = None) -> ExperimentConfig:
    """Parse and validate a config document held in memory."""
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        problem = getattr(e, "problem", None) or str(e)
        raise ConfigError(f"invalid YAML: {problem}", source, line=line) from None
    lines = _line_index(node) if node is not None else {}
    return _Loader(source, lines).load(data)


def load_config(path: str | Path) -> ExperimentConfig:
    """
    Load and validate an experiment config file.

    Args:
        path: YAML config file

    Returns:
        ExperimentConfig with defaults filled in

    Raises:
        ConfigError: the file is missing, unreadable or invalid
    """
    path = Path(path)
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise ConfigError("config file not found", path) from None
    except OSError as e:
        raise ConfigError(f"cannot read config: {e.strerror}", path) from None
    return load_config_text(text, path)
