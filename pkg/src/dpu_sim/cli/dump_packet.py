#!/usr/bin/env python3
"""
Pretty-print update frame files.
"""

import argparse
import sys
from pathlib import Path

import numpy as np
from tabulate import tabulate

from dpu_sim.cli.common import add_logging_argument, setup_logging
from dpu_sim.codec.errors import PacketError
from dpu_sim.codec.packet import UpdatePacket, decode_packet


def describe_packet(packet: UpdatePacket, size: int, show_values: int = 8) -> list[list]:
    """Field/value rows for one decoded frame."""
    rows = [
        ["version", packet.version],
        ["round", packet.round],
        ["frame_type", packet.frame_type.name.lower()],
        ["I", packet.n_weights],
        ["k_count", packet.k_count],
        ["value_bits", packet.value_bits],
        ["size_bytes", size],
    ]
    if packet.mask is not None:
        rows.append(["mask_encoding", packet.mask_encoding.name.lower()])
        first = np.flatnonzero(packet.mask)[:show_values].tolist()
        rows.append(["first_indices", first])
    if packet.seed is not None:
        rows.append(["seed", packet.seed])
    if packet.values.size:
        shown = ", ".join(f"{v:.6g}" for v in packet.values[:show_values])
        more = " ..." if packet.values.size > show_values else ""
        rows.append(["values", f"[{shown}{more}]"])
    return rows


def add_arguments(p: argparse.ArgumentParser) -> None:
    p.add_argument("files", nargs="+", help="Frame files (round-NNN.bin)")
    p.add_argument("--values", type=int, default=8, help="How many values to show")
    add_logging_argument(p)


def run(args: argparse.Namespace) -> int:
    if not setup_logging(args):
        return 2
    rc = 0
    for name in args.files:
        path = Path(name)
        try:
            data = path.read_bytes()
        except OSError as e:
            print(f"{path}: cannot read: {e.strerror}", file=sys.stderr)
            rc = 1
            continue
        try:
            packet = decode_packet(data)
        except PacketError as e:
            print(f"{path}: {e.code}: {e}", file=sys.stderr)
            rc = 1
            continue
        print(path)
        print(tabulate(describe_packet(packet, len(data), args.values), tablefmt="plain"))
        print()
    return rc


def main() -> int:
    p = argparse.ArgumentParser(description="Decode and print update frames")
    add_arguments(p)
    return run(p.parse_args())


if __name__ == "__main__":
    sys.exit(main())
