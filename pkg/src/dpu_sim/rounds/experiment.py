"""
Multi-round experiment orchestration.

Each round the edge has uploaded new samples, the server trains a
candidate with the configured method, encodes it into a frame, and the
edge applies the frame. Partial methods are gated on validation accuracy:
a candidate that is not strictly better than the serving model is not
deployed. Accuracies are measured on the edge-side weights.
"""

import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

from dpu_sim.codec.packet import (
    FrameType,
    UpdatePacket,
    apply_packet,
    encode_packet,
    full_packet,
    skip_packet,
    sparse_packet,
)
from dpu_sim.logging.filters import experiment_context
from dpu_sim.logging.setup import configure_logging
from dpu_sim.nn.network import WeightVector, accuracy, init_weights, loss
from dpu_sim.rounds.config import ExperimentConfig, FuInit, Method, SkipMode
from dpu_sim.rounds.data import (
    DataStream,
    MinibatchSchedule,
    data_seed,
    generate_synthetic,
    load_idx_pool,
)
from dpu_sim.rounds.outputs import (
    cell_packet_dir,
    prepare_output_dir,
    write_round_csv,
    write_summary,
)
from dpu_sim.rounds.policy import accept_update
from dpu_sim.rounds.records import RoundLog
from dpu_sim.rounds.seeds import FU_INIT, INIT, RPU_MASK, derive_seed
from dpu_sim.update.mask import Mask, rpu_mask
from dpu_sim.update.procedures import dpu_round, gcpu_round, sparse_finetune
from dpu_sim.update.training import run_steps

log = logging.getLogger(__name__)

MAX_WORKERS_ENV = "DPU_SIM_MAX_WORKERS"


@dataclass(frozen=True, eq=False)
class RoundState:
    """
    Server and edge state between rounds.

    training is what the edge holds as the base for the next frame and
    what the server trains from; serving is what the edge answers queries
    with. They differ only in SkipMode.SEND after a rejected candidate.
    Both are None before the first round.
    """

    seed: int
    stream: DataStream
    round: int = 0
    training: WeightVector | None = None
    serving: WeightVector | None = None
    serving_val_acc: float = float("-inf")
    last_reinit_size: int = 0
    last_reinit_round: int = 0
    previous_mask: Mask | None = None
    candidate: WeightVector | None = None


def build_stream(config: ExperimentConfig, seed: int) -> DataStream:
    """Draw or load the sample pool of one seed and split it."""
    data = config.data
    total = data.initial_size + (config.rounds - 1) * data.delta_size + data.eval_size
    if data.source == "idx":
        pool = load_idx_pool(data.idx_images, data.idx_labels, data_seed(seed))
    else:
        pool = generate_synthetic(data.synthetic, total, data_seed(seed))
    pool.check(config.arch)
    return DataStream(
        pool,
        initial_size=data.initial_size,
        delta_size=data.delta_size,
        rounds=config.rounds,
        eval_size=data.eval_size,
        val_fraction=data.val_fraction,
    )


def initial_state(config: ExperimentConfig, seed: int) -> RoundState:
    return RoundState(seed=seed, stream=build_stream(config, seed))


def _train_candidate(
    state: RoundState,
    method: Method,
    config: ExperimentConfig,
    round_index: int,
    schedule: MinibatchSchedule,
) -> tuple[WeightVector, float, UpdatePacket, Mask | None, bool]:
    """
    Train one candidate and build its frame.

    Returns:
        (candidate, training loss, frame, mask or None, whether training
        restarted from the initial network)
    """
    arch = config.arch
    n = arch.n_weights
    epochs = config.training.epochs
    iterations = schedule.iterations(epochs)
    value_bits = config.cost.weight_bits
    init_seed = derive_seed(state.seed, INIT)
    train = schedule.full()

    if method is Method.FU:
        fu_init = config.update.fu_init
        if fu_init is FuInit.PREVIOUS and state.training is not None:
            start = state.training
        elif fu_init is FuInit.FRESH_SEED:
            start = init_weights(arch, derive_seed(state.seed, FU_INIT, round_index))
        else:
            start = init_weights(arch, init_seed)
        opt = config.training.optimizer_state(n, schedule.batches_per_epoch, stretch=2)
        result = run_steps(start, schedule, opt, 2 * iterations)
        candidate = result.weights
        packet = full_packet(candidate, round_index, value_bits)
        return candidate, loss(candidate, train), packet, None, False

    k = config.update.ratio(method)
    policy = config.update.reinit_policy(method)
    reinit = state.training is None or policy.due(
        round_index,
        state.stream.size(round_index),
        state.last_reinit_size,
        state.last_reinit_round,
    )
    base = init_weights(arch, init_seed) if reinit else state.training
    opt = config.training.optimizer_state(n, schedule.batches_per_epoch)

    if method is Method.DPU:
        result = dpu_round(base, schedule, k, opt, iterations)
    elif method is Method.GCPU:
        result = gcpu_round(base, schedule, k, opt, iterations)
    else:
        mask = rpu_mask(arch, k, derive_seed(state.seed, RPU_MASK, round_index))
        if state.previous_mask is not None and mask == state.previous_mask:
            log.warning(f"round {round_index}: random mask repeats the previous round's")
        opt = config.training.optimizer_state(n, schedule.batches_per_epoch, stretch=2)
        result = sparse_finetune(base, base, mask, schedule, opt, 2 * iterations)

    packet = sparse_packet(
        result.w_new,
        result.mask,
        round_index,
        value_bits,
        seed=init_seed if reinit else None,
    )
    return result.w_new, result.train_loss_final, packet, result.mask, reinit


def run_round(
    state: RoundState, method: Method, config: ExperimentConfig
) -> tuple[RoundState, RoundLog, UpdatePacket]:
    """
    Run one round of a method.

    Returns:
        (next state, round metrics, frame emitted to the edge)
    """
    started = time.perf_counter()
    method = Method(method)
    arch = config.arch
    r = state.round + 1
    stream = state.stream
    train = stream.training_set(r)
    schedule = MinibatchSchedule(train, config.training.batch_size, state.seed, r)

    candidate, train_loss, packet, mask, reinit = _train_candidate(
        state, method, config, r, schedule
    )

    edge_base = state.training
    if edge_base is None:
        edge_base = init_weights(arch, derive_seed(state.seed, INIT))
    edge_candidate = apply_packet(edge_base, packet, arch)
    candidate_val_acc = accuracy(edge_candidate, stream.validation)

    gated = method is not Method.FU and state.serving is not None
    accepted = not gated or accept_update(candidate_val_acc, state.serving_val_acc)

    updates: dict = {"round": r, "candidate": candidate}
    if mask is not None:
        updates["previous_mask"] = mask
    frame = packet
    if accepted:
        updates.update(
            training=edge_candidate,
            serving=edge_candidate,
            serving_val_acc=candidate_val_acc,
        )
    else:
        log.warning(
            f"round {r}: candidate val acc {candidate_val_acc:.4f} does not beat "
            f"deployed {state.serving_val_acc:.4f}; keeping the deployed model"
        )
        if config.update.skip_mode is SkipMode.HOLD:
            frame = skip_packet(r, arch.n_weights)
        else:
            updates["training"] = edge_candidate
    # held re-init rounds move the anchor too; the next round trains from the deployed weights
    if reinit:
        updates.update(last_reinit_size=stream.size(r), last_reinit_round=r)
    next_state = replace(state, **updates)

    bytes_sent = len(encode_packet(frame))
    entry = RoundLog(
        round=r,
        method=method.value,
        seed=state.seed,
        train_loss=train_loss,
        val_acc=next_state.serving_val_acc,
        test_acc=accuracy(next_state.serving, stream.test),
        bytes_sent=bytes_sent,
        reinit=frame.frame_type is FrameType.REINIT_SPARSE,
        skipped=not accepted,
        mask_count=0 if frame.frame_type is FrameType.SKIP else frame.k_count,
        new_samples=stream.new_samples(r),
        train_size=stream.size(r),
        wall_time=time.perf_counter() - started,
    )
    log.info(
        f"{method.value} round {r}: |D|={entry.train_size} loss={train_loss:.4f} "
        f"val={entry.val_acc:.4f} test={entry.test_acc:.4f} bytes={bytes_sent}"
        f"{' reinit' if entry.reinit else ''}{' skipped' if entry.skipped else ''}"
    )
    return next_state, entry, frame


def run_cell(
    config: ExperimentConfig,
    method: Method,
    seed: int,
    packet_dir: Path | None = None,
) -> list[RoundLog]:
    """All rounds of one (method, seed) pair; frames are saved when packet_dir is set."""
    method = Method(method)
    with experiment_context(method.value, seed):
        state = initial_state(config, seed)
        logs = []
        for _ in range(config.rounds):
            state, entry, frame = run_round(state, method, config)
            logs.append(entry)
            if packet_dir is not None:
                packet_dir.mkdir(parents=True, exist_ok=True)
                target = packet_dir / f"round-{entry.round:03d}.bin"
                target.write_bytes(encode_packet(frame))
        return logs


def resolve_workers(requested: int | None, cells: int) -> int:
    """Worker count: requested or CPU count, capped by DPU_SIM_MAX_WORKERS and cells."""
    workers = requested or os.cpu_count() or 1
    cap = os.environ.get(MAX_WORKERS_ENV)
    if cap:
        try:
            workers = min(workers, max(int(cap), 1))
        except ValueError:
            log.warning(f"ignoring non-integer {MAX_WORKERS_ENV}={cap!r}")
    return max(1, min(workers, cells))


def init_worker(level: int) -> None:
    configure_logging(level=level)


def _run_cell_job(
    config: ExperimentConfig, method: Method, seed: int, out_dir: Path | None
) -> list[RoundLog]:
    packet_dir = None
    if out_dir is not None and config.output.packets:
        packet_dir = cell_packet_dir(out_dir, method, seed)
    logs = run_cell(config, method, seed, packet_dir)
    if out_dir is not None:
        write_round_csv(out_dir, method, seed, logs)
    return logs


def run_experiment(
    config: ExperimentConfig,
    out_dir: Path | None = None,
    methods: tuple[Method, ...] | None = None,
    seeds: tuple[int, ...] | None = None,
    force: bool = False,
    max_workers: int | None = None,
) -> dict[tuple[Method, int], list[RoundLog]]:
    """
    Run every (method, seed) cell and, with out_dir, persist the results.

    Cells are independent and may run in a process pool; each writes its
    own CSV and frames, and the JSON summary is aggregated afterwards.

    Raises:
        OutputExistsError: out_dir already holds results and force is False
    """
    methods = tuple(Method(m) for m in (methods or config.update.methods))
    seeds = tuple(seeds or config.seeds)
    cells = [(m, s) for m in methods for s in seeds]
    if out_dir is not None:
        out_dir = Path(out_dir)
        prepare_output_dir(out_dir, config, force)

    workers = resolve_workers(max_workers, len(cells))
    log.info(f"running {len(cells)} cells with {workers} worker(s)")
    if workers == 1:
        results = {cell: _run_cell_job(config, *cell, out_dir) for cell in cells}
    else:
        level = logging.getLogger().getEffectiveLevel()
        with ProcessPoolExecutor(
            max_workers=workers, initializer=init_worker, initargs=(level,)
        ) as pool:
            futures = {
                cell: pool.submit(_run_cell_job, config, *cell, out_dir) for cell in cells
            }
            results = {cell: future.result() for cell, future in futures.items()}

    if out_dir is not None:
        write_summary(out_dir, results)
    return results
