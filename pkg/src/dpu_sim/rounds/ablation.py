"""
Rewinding ablation: compare selection metrics on one shared full update.

For each seed the network is first trained on D^1 (the deployed model),
then fully updated on D^2 once. Global, local, combined and per-layer
random masks are applied to that same (w, w_f, trace), and the training
loss of each rewound vector is reported next to the loss of w_f.
"""

import logging
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from dpu_sim.contribution.diagnostics import BoundReport, dump_contributions, smoothness_report
from dpu_sim.contribution.metrics import combine, global_contribution
from dpu_sim.logging.filters import experiment_context
from dpu_sim.nn.network import WeightVector, init_weights, loss
from dpu_sim.rounds.config import ExperimentConfig
from dpu_sim.rounds.data import MinibatchSchedule
from dpu_sim.rounds.experiment import build_stream, init_worker, resolve_workers
from dpu_sim.rounds.seeds import INIT, RPU_MASK, derive_seed
from dpu_sim.update.mask import rewind, rpu_mask, select_mask
from dpu_sim.update.procedures import full_update
from dpu_sim.update.training import run_steps

log = logging.getLogger(__name__)

METRICS = ("full", "global", "local", "combined", "random")


@dataclass(frozen=True)
class AblationRow:
    metric: str
    mean: float
    std: float


@dataclass(frozen=True, eq=False)
class SeedAblation:
    seed: int
    losses: dict[str, float]
    bound: BoundReport


def _deployed_weights(
    config: ExperimentConfig, schedule: MinibatchSchedule, seed: int
) -> WeightVector:
    start = init_weights(config.arch, derive_seed(seed, INIT))
    opt = config.training.optimizer_state(
        config.arch.n_weights, schedule.batches_per_epoch
    )
    iterations = schedule.iterations(config.training.epochs)
    return run_steps(start, schedule, opt, iterations).weights


def ablate_seed(
    config: ExperimentConfig,
    seed: int,
    k: float | None = None,
    dump_dir: Path | None = None,
) -> SeedAblation:
    """
    Rewound training losses of every selection metric for one seed.

    With dump_dir the global, local and combined contributions are written
    to dump_dir/contributions-seed-<seed>.txt.
    """
    k = config.update.k if k is None else k
    arch = config.arch
    with experiment_context("ablate-rewind", seed):
        stream = build_stream(config, seed)
        batch_size = config.training.batch_size
        first = MinibatchSchedule(stream.training_set(1), batch_size, seed, 1)
        w = _deployed_weights(config, first, seed)

        second_round = min(2, stream.rounds)
        schedule = MinibatchSchedule(
            stream.training_set(second_round), batch_size, seed, second_round
        )
        opt = config.training.optimizer_state(arch.n_weights, schedule.batches_per_epoch)
        update = full_update(w, schedule, opt, schedule.iterations(config.training.epochs))
        train = schedule.full()

        c_global = global_contribution(w, update.w_f)
        c_local = update.trace.as_contribution()
        c_combined = combine(c_global, c_local)
        if dump_dir is not None:
            dump_contributions(
                Path(dump_dir) / f"contributions-seed-{seed}.txt", c_global, c_local, c_combined
            )
        masks = {
            "global": select_mask(c_global, k),
            "local": select_mask(c_local, k),
            "combined": select_mask(c_combined, k),
            "random": rpu_mask(arch, k, derive_seed(seed, RPU_MASK, second_round)),
        }
        losses = {"full": update.train_loss_full}
        for name, mask in masks.items():
            losses[name] = loss(rewind(w, update.w_f, mask), train)
        bound = smoothness_report(w, update.w_f, masks["combined"].bits, train)
        log.info(
            "rewound losses: "
            + " ".join(f"{name}={value:.4f}" for name, value in losses.items())
        )
        return SeedAblation(seed=seed, losses=losses, bound=bound)


def summarize_ablation(results: Sequence[SeedAblation]) -> list[AblationRow]:
    """One row per metric with the mean and population std over seeds."""
    if not results:
        raise ValueError("no ablation results to summarize")
    rows = []
    for metric in METRICS:
        values = np.array([r.losses[metric] for r in results])
        rows.append(AblationRow(metric, float(values.mean()), float(values.std())))
    return rows


def run_ablation(
    config: ExperimentConfig,
    seeds: Sequence[int] | None = None,
    k: float | None = None,
    max_workers: int | None = None,
    dump_dir: Path | None = None,
) -> list[SeedAblation]:
    seeds = list(seeds or config.seeds)
    if dump_dir is not None:
        Path(dump_dir).mkdir(parents=True, exist_ok=True)
    workers = resolve_workers(max_workers, len(seeds))
    if workers == 1:
        return [ablate_seed(config, s, k, dump_dir) for s in seeds]
    level = logging.getLogger().getEffectiveLevel()
    with ProcessPoolExecutor(
        max_workers=workers, initializer=init_worker, initargs=(level,)
    ) as pool:
        futures = [pool.submit(ablate_seed, config, s, k, dump_dir) for s in seeds]
        return [future.result() for future in futures]


def bound_violations(results: Sequence[SeedAblation]) -> list[int]:
    """Seeds whose rewound loss gap exceeds the empirical smoothness bound."""
    return [r.seed for r in results if not r.bound.holds]
