"""
Multi-round experiments: growing data, method dispatch, re-initialization,
validation-gated acceptance and result files.
"""

from dpu_sim.rounds.ablation import (
    AblationRow,
    SeedAblation,
    ablate_seed,
    run_ablation,
    summarize_ablation,
)
from dpu_sim.rounds.config import (
    CostConfig,
    DataConfig,
    ExperimentConfig,
    FuInit,
    Method,
    OutputConfig,
    SkipMode,
    TrainingConfig,
    UpdateConfig,
    config_to_dict,
)
from dpu_sim.rounds.data import (
    DataStream,
    MinibatchSchedule,
    SyntheticParams,
    generate_synthetic,
    load_idx_images,
    load_idx_labels,
    load_idx_pool,
)
from dpu_sim.rounds.experiment import (
    RoundState,
    build_stream,
    initial_state,
    run_cell,
    run_experiment,
    run_round,
)
from dpu_sim.rounds.outputs import (
    OutputExistsError,
    read_round_csv,
    summarize,
    write_round_csv,
    write_summary,
)
from dpu_sim.rounds.policy import ReinitPolicy, accept_update, reinit_due
from dpu_sim.rounds.records import CSV_FIELDS, RoundLog
from dpu_sim.rounds.seeds import derive_seed

__all__ = [
    "AblationRow",
    "CSV_FIELDS",
    "CostConfig",
    "DataConfig",
    "DataStream",
    "ExperimentConfig",
    "FuInit",
    "Method",
    "MinibatchSchedule",
    "OutputConfig",
    "OutputExistsError",
    "ReinitPolicy",
    "RoundLog",
    "RoundState",
    "SeedAblation",
    "SkipMode",
    "SyntheticParams",
    "TrainingConfig",
    "UpdateConfig",
    "ablate_seed",
    "accept_update",
    "build_stream",
    "config_to_dict",
    "derive_seed",
    "generate_synthetic",
    "initial_state",
    "load_idx_images",
    "load_idx_labels",
    "load_idx_pool",
    "read_round_csv",
    "reinit_due",
    "run_ablation",
    "run_cell",
    "run_experiment",
    "run_round",
    "summarize",
    "summarize_ablation",
    "write_round_csv",
    "write_summary",
]
