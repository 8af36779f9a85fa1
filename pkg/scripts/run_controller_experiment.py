#!/usr/bin/env python3
"""Closed-loop regulation study: 10 runs x 2000 steps, population 750.

Writes controller_series.csv (per-step cross-run mean/std of price, error,
and on-route occupancy) to the output directory.
"""
import argparse
from pathlib import Path

from herdsim.cli import main as cli_main

REPO = Path(__file__).resolve().parent.parent


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--config", default=str(REPO / "configs" / "controller.json"))
    parser.add_argument("--out", default="results/controller")
    parser.add_argument("--runs", type=int, default=10)
    args = parser.parse_args()
    return cli_main(["experiment", "controller", "--config", args.config,
                     "--out", args.out, "--runs", str(args.runs)])


if __name__ == "__main__":
    raise SystemExit(main())
