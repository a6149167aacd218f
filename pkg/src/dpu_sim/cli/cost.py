#!/usr/bin/env python3
"""
Tabulate the communication cost model.

Prints, per updating ratio k, the index entropy, the modelled sparse
frame size and the size of an actual block-coded random mask, then the
total-cost ratio to full updating as a function of the node count N.
"""

import argparse
import math
import sys
from pathlib import Path

import numpy as np
from tabulate import tabulate

from dpu_sim.cli.common import add_logging_argument, read_config, setup_logging
from dpu_sim.codec.blockcode import coded_mask_bits
from dpu_sim.commcost.model import (
    CostParams,
    entropy_table,
    node_ratio_curve,
    write_rows_csv,
)
from dpu_sim.update.mask import target_k_count
from dpu_sim.utils.config import parse_float_list, parse_int_list

DEFAULT_KS = "0.01,0.05,0.1,0.2,0.5"
DEFAULT_NODES = "1,2,5,10,20,50,100,200,500,1000"


def add_arguments(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="Take I, S_w, S_d, N, R and |dD| from a config")
    p.add_argument("--weights", type=int, help="I, number of weights")
    p.add_argument("--weight-bits", type=int, help="S_w (default 32)")
    p.add_argument("--sample-bits", type=float, help="S_d (default 64)")
    p.add_argument("--rounds", type=int, help="R for the node curve (default 8)")
    p.add_argument("--delta-size", type=int, help="|dD| per round (default 200)")
    p.add_argument("--k", default=DEFAULT_KS, help=f"Updating ratios (default {DEFAULT_KS})")
    p.add_argument("--nodes", default=DEFAULT_NODES, help='Node counts, list or "a..b"')
    p.add_argument("--seed", type=int, default=0, help="Seed of the measured random masks")
    p.add_argument("--out", help="Directory for entropy.csv and node_ratio.csv")
    add_logging_argument(p)


def measured_index_bits(k: float, n_weights: int, seed: int) -> int:
    """Mask section size the encoder picks for a uniformly random mask."""
    count = target_k_count(n_weights, k)
    bits = np.zeros(n_weights, dtype=bool)
    rng = np.random.default_rng(seed)
    bits[rng.choice(n_weights, size=count, replace=False)] = True
    coded = math.ceil(coded_mask_bits(bits, count) / 8)
    return 8 * min(coded, math.ceil(n_weights / 8))


def _params(args: argparse.Namespace) -> tuple[CostParams, int, int] | None:
    rounds, delta = 8, 200
    weight_bits, sample_bits, nodes = 32, 64.0, 1
    n_weights = args.weights
    if args.config:
        config = read_config(args.config)
        if config is None:
            return None
        n_weights = n_weights or config.arch.n_weights
        weight_bits = config.cost.weight_bits
        sample_bits = config.sample_bits
        nodes = config.cost.nodes
        rounds, delta = config.rounds, config.data.delta_size
    if n_weights is None:
        print("Either --config or --weights is required", file=sys.stderr)
        return None
    try:
        params = CostParams(
            n_weights=n_weights,
            weight_bits=args.weight_bits or weight_bits,
            sample_bits=args.sample_bits or sample_bits,
            nodes=nodes,
        )
    except ValueError as e:
        print(f"Invalid cost parameters: {e}", file=sys.stderr)
        return None
    return params, args.rounds or rounds, args.delta_size if args.delta_size is not None else delta


def run(args: argparse.Namespace) -> int:
    if not setup_logging(args):
        return 2
    resolved = _params(args)
    if resolved is None:
        return 2
    params, rounds, delta = resolved

    try:
        ks = parse_float_list(args.k)
        nodes = parse_int_list(args.nodes)
        if any(not 0 < k <= 1 for k in ks):
            raise ValueError(f"every k must be in (0, 1], got {args.k!r}")
        if not nodes or any(n < 1 for n in nodes):
            raise ValueError(f"node counts must be >= 1, got {args.nodes!r}")
        if rounds < 1 or delta < 0:
            raise ValueError(f"need rounds >= 1 and delta size >= 0, got {rounds}, {delta}")
    except ValueError as e:
        print(f"Invalid range: {e}", file=sys.stderr)
        return 2

    rows = entropy_table(ks, params)
    for row in rows:
        row["coded_index_bits"] = measured_index_bits(row["k"], params.n_weights, args.seed)
        row["entropy_index_bits"] = row["index_entropy"] * params.n_weights

    curves = {k: node_ratio_curve(params, k, rounds, delta, nodes) for k in ks}
    curve_rows = []
    for i, n in enumerate(nodes):
        row = {"nodes": n}
        for k in ks:
            row[f"ratio_k{k:g}"] = curves[k][i][1]
        curve_rows.append(row)

    print(f"I={params.n_weights} S_w={params.weight_bits} S_d={params.sample_bits:g}")
    print()
    print(tabulate(rows, headers="keys", tablefmt="simple", floatfmt=".4f"))
    print()
    print(f"Total cost ratio to full updating over {rounds} rounds, |dD|={delta}")
    print(tabulate(curve_rows, headers="keys", tablefmt="simple", floatfmt=".4f"))

    if args.out:
        out = Path(args.out)
        try:
            write_rows_csv(out / "entropy.csv", rows)
            write_rows_csv(out / "node_ratio.csv", curve_rows)
        except OSError as e:
            print(f"Failed to write cost tables: {e}", file=sys.stderr)
            return 1
        print(f"\nCSV written to {out}")
    return 0


def main() -> int:
    p = argparse.ArgumentParser(description="Communication cost model tables")
    add_arguments(p)
    return run(p.parse_args())


if __name__ == "__main__":
    sys.exit(main())
