#!/usr/bin/env python3
"""
Run multi-round partial updating experiments.

Runs every (method, seed) cell of a config and writes per-cell CSVs,
emitted frames and a JSON summary into the output directory.
"""

import argparse
import sys
from pathlib import Path

from tabulate import tabulate

from dpu_sim.cli.common import (
    add_logging_argument,
    add_workers_argument,
    read_config,
    selection,
    setup_logging,
)
from dpu_sim.rounds.experiment import run_experiment
from dpu_sim.rounds.outputs import OutputExistsError, summarize


def add_arguments(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", default="config.yaml", help="Experiment config file")
    p.add_argument("--out", default="results", help="Output directory")
    p.add_argument("--seeds", help='Seeds, e.g. "1..5" or "1,3,7" (default: config)')
    p.add_argument("--methods", help='Methods, e.g. "dpu,fu" (default: config)')
    p.add_argument("--force", action="store_true", help="Overwrite existing results")
    add_workers_argument(p)
    add_logging_argument(p)


def format_summary(summary: dict) -> str:
    headers = ["Method", "Final test acc", "Std", "Bytes (sum)", "Ratio to FU", "Skipped"]
    rows = []
    for method, entry in summary.items():
        ratio = entry.get("ratio_to_fu")
        skipped = sum(r["skipped"] for r in entry["per_round"])
        rows.append(
            [
                method,
                f"{entry['final_test_acc']['mean']:.4f}",
                f"{entry['final_test_acc']['std']:.4f}",
                f"{entry['cumulative_bytes']['mean']:.0f}",
                "-" if ratio is None else f"{ratio['mean']:.4f}",
                skipped,
            ]
        )
    return tabulate(rows, headers=headers, tablefmt="simple")


def run(args: argparse.Namespace) -> int:
    if not setup_logging(args):
        return 2
    config = read_config(args.config)
    if config is None:
        return 2
    selected = selection(args)
    if selected is None:
        return 2
    methods, seeds = selected

    try:
        results = run_experiment(
            config,
            out_dir=Path(args.out),
            methods=methods,
            seeds=seeds,
            force=args.force,
            max_workers=args.workers,
        )
    except OutputExistsError as e:
        print(f"Refusing to overwrite results: {e}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as e:
        print(f"Experiment failed: {e}", file=sys.stderr)
        return 1

    print(format_summary(summarize(results)))
    print(f"\nResults written to {args.out}")
    return 0


def main() -> int:
    p = argparse.ArgumentParser(description="Run partial updating experiments")
    add_arguments(p)
    return run(p.parse_args())


if __name__ == "__main__":
    sys.exit(main())
