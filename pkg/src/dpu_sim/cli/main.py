#!/usr/bin/env python3
"""
Umbrella entry point with one subcommand per tool.
"""

import argparse
import sys

from dpu_sim.bootstrap import config_template
from dpu_sim.cli import ablate, cost, dump_packet, run

COMMANDS = {
    "run": (run, "Run multi-round experiments"),
    "cost": (cost, "Tabulate the communication cost model"),
    "ablate-rewind": (ablate, "Compare rewinding metrics on one full update"),
    "dump-packet": (dump_packet, "Decode and print update frames"),
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="dpu-sim", description="Deep partial updating simulator"
    )
    sub = p.add_subparsers(dest="command", required=True)
    for name, (module, help_text) in COMMANDS.items():
        sp = sub.add_parser(name, help=help_text, description=help_text)
        module.add_arguments(sp)
        sp.set_defaults(handler=module.run)
    init = sub.add_parser("init", help="Print a documented config template")
    init.set_defaults(handler=lambda args: config_template.main())
    return p


def main() -> int:
    args = build_parser().parse_args()
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())
