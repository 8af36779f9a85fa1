#!/usr/bin/env python3
"""Benchmark evaluation: 125 cycles of 30-50 agents, 1000 steps each.

Writes runs.csv (per-cycle metrics) and report.json (aggregates and the
A1-A4 pass flags) to the output directory, and prints the report.
"""
import argparse
from pathlib import Path

from herdsim.cli import main as cli_main

REPO = Path(__file__).resolve().parent.parent


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--config", default=str(REPO / "configs" / "metrics.json"))
    parser.add_argument("--out", default="results/metrics")
    parser.add_argument("--cycles", type=int, default=125)
    args = parser.parse_args()
    return cli_main(["experiment", "metrics", "--config", args.config,
                     "--out", args.out, "--cycles", str(args.cycles)])


if __name__ == "__main__":
    raise SystemExit(main())
