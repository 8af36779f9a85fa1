#!/usr/bin/env python3
"""Start a live participant-enabled run on the demo network.

Listens for line-JSON clients on TCP :8765, WebSocket :8767, and serves the
network JSON (plus the web client build, if present) over HTTP :8766.
"""
import argparse
from pathlib import Path

from herdsim.cli import main as cli_main

REPO = Path(__file__).resolve().parent.parent


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--config", default=str(REPO / "configs" / "demo.json"))
    parser.add_argument("--listen", default="127.0.0.1:8765")
    parser.add_argument("--static", default=str(REPO / "frontend" / "dist"))
    parser.add_argument("--tick", type=float, default=1.0)
    args = parser.parse_args()
    static = args.static if Path(args.static).is_dir() else None
    cmd = ["serve", "--config", args.config, "--listen", args.listen,
           "--tick", str(args.tick)]
    if static:
        cmd += ["--static", static]
    return cli_main(cmd)


if __name__ == "__main__":
    raise SystemExit(main())
