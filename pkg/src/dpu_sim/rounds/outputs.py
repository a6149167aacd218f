"""
Experiment outputs: config snapshot, per-cell CSVs and frames, JSON summary.

Layout under the output directory:

    config.yaml                  snapshot of the effective config
    <method>/seed-<s>.csv        one row per round
    <method>/seed-<s>-packets/   round-NNN.bin, the emitted frames
    summary.json                 per-round mean/std across seeds
"""

import csv
import json
import logging
from collections.abc import Mapping, Sequence
from pathlib import Path

import numpy as np
import yaml

from dpu_sim.commcost.model import cumulative_ratio
from dpu_sim.rounds.config import ExperimentConfig, Method, config_to_dict
from dpu_sim.rounds.records import CSV_FIELDS, RoundLog

log = logging.getLogger(__name__)

CONFIG_FILE = "config.yaml"
SUMMARY_FILE = "summary.json"
SUMMARY_FIELDS = ("train_loss", "val_acc", "test_acc", "bytes_sent", "mask_count")


class OutputExistsError(FileExistsError):
    """The output directory already holds results and overwriting was not forced."""


def prepare_output_dir(out_dir: Path, config: ExperimentConfig, force: bool = False) -> None:
    """Create out_dir and write the config snapshot."""
    out_dir = Path(out_dir)
    if out_dir.exists() and any(out_dir.iterdir()) and not force:
        raise OutputExistsError(
            f"{out_dir} is not empty; use --force to overwrite existing results"
        )
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / CONFIG_FILE, "w") as fh:
        yaml.safe_dump(config_to_dict(config), fh, sort_keys=False)


def cell_csv_path(out_dir: Path, method: Method, seed: int) -> Path:
    return Path(out_dir) / Method(method).value / f"seed-{seed}.csv"


def cell_packet_dir(out_dir: Path, method: Method, seed: int) -> Path:
    return Path(out_dir) / Method(method).value / f"seed-{seed}-packets"


def write_round_csv(
    out_dir: Path, method: Method, seed: int, logs: Sequence[RoundLog]
) -> Path:
    path = cell_csv_path(out_dir, method, seed)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_FIELDS)
        for entry in logs:
            writer.writerow(entry.csv_row())
    log.debug(f"wrote {len(logs)} rounds to {path}")
    return path


def read_round_csv(path: Path) -> list[dict[str, float]]:
    """Rows of a per-cell CSV with every column parsed as float."""
    with open(path, newline="") as fh:
        return [{k: float(v) for k, v in row.items()} for row in csv.DictReader(fh)]


def _mean_std(values: Sequence[float]) -> dict[str, float]:
    array = np.asarray(values, dtype=np.float64)
    return {"mean": float(np.mean(array)), "std": float(np.std(array))}


def summarize(results: Mapping[tuple[Method, int], Sequence[RoundLog]]) -> dict:
    """
    Aggregate per-seed logs into per-method, per-round mean and std.

    std is the population standard deviation over seeds. Methods other than
    full updating also get their cumulative server-to-edge ratio to full
    updating for every seed both were run with.
    """
    by_method: dict[Method, dict[int, Sequence[RoundLog]]] = {}
    for (method, seed), logs in results.items():
        by_method.setdefault(Method(method), {})[seed] = logs
    reference = by_method.get(Method.FU, {})

    summary = {}
    for method, per_seed in by_method.items():
        seeds = sorted(per_seed)
        rounds = len(per_seed[seeds[0]])
        per_round = []
        for i in range(rounds):
            entries = [per_seed[s][i] for s in seeds]
            row: dict = {"round": i + 1}
            for name in SUMMARY_FIELDS:
                row[name] = _mean_std([getattr(e, name) for e in entries])
            row["reinit"] = sum(e.reinit for e in entries)
            row["skipped"] = sum(e.skipped for e in entries)
            per_round.append(row)
        method_summary = {
            "seeds": seeds,
            "per_round": per_round,
            "final_test_acc": _mean_std([per_seed[s][-1].test_acc for s in seeds]),
            "cumulative_bytes": _mean_std(
                [sum(e.bytes_sent for e in per_seed[s]) for s in seeds]
            ),
            "wall_time_s": float(
                np.mean([sum(e.wall_time for e in per_seed[s]) for s in seeds])
            ),
        }
        shared = [s for s in seeds if s in reference]
        if method is not Method.FU and shared:
            method_summary["ratio_to_fu"] = _mean_std(
                [cumulative_ratio(per_seed[s], reference[s]) for s in shared]
            )
        summary[method.value] = method_summary
    return summary


def write_summary(
    out_dir: Path, results: Mapping[tuple[Method, int], Sequence[RoundLog]]
) -> Path:
    path = Path(out_dir) / SUMMARY_FILE
    with open(path, "w") as fh:
        json.dump({"methods": summarize(results)}, fh, indent=2)
        fh.write("\n")
    log.info(f"summary written to {path}")
    return path
