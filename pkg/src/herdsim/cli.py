"""Command-line interface: run, serve, netgen, and experiment subcommands."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .agents import DecisionCurve
from .engine import SimConfig, Simulation, run
from .metrics import run_controller_experiment, run_metrics_experiment
from .network import GeoPoint, generate_grid, load_network, save_network
from .pricing import ControllerState


def load_config(path, seed_override: int | None = None) -> SimConfig:
    """Build a SimConfig from a JSON file mirroring its field names."""
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    net_spec = data["network"]
    if "path" in net_spec:
        net_path = Path(net_spec["path"])
        if not net_path.is_absolute():
            net_path = path.parent / net_path
        network = load_network(net_path)
    elif "grid" in net_spec:
        g = net_spec["grid"]
        network = generate_grid(
            g["rows"], g["cols"], g["spacing"],
            GeoPoint(g.get("lat", 51.4974), g.get("lon", -0.1776)))
    else:
        raise ValueError("config network must give a 'path' or 'grid'")
    ctrl = data.get("controller", {})
    curve = data.get("decision_curve", {})
    return SimConfig(
        network=network,
        n_agents=data["n_agents"],
        n_steps=data["n_steps"],
        seed=seed_override if seed_override is not None else data.get("seed", 0),
        incentivised_routes=data.get("incentivised_routes", []),
        price_interval=data.get("price_interval", 10),
        controller=ControllerState(
            fixed_demand=ctrl.get("fixed_demand", 180),
            alpha=ctrl.get("alpha", -4.01),
            beta=ctrl.get("beta", 0.99),
            kappa=ctrl.get("kappa", 0.1)),
        decision_curve=DecisionCurve(
            p_max=curve.get("p_max", 0.25),
            pi_sat=curve.get("pi_sat", 200.0)),
        waypoint_spacing=data.get("waypoint_spacing", 50.0),
        hil_enabled=data.get("hil_enabled", False),
        sticky_commitment=data.get("sticky_commitment", False),
        ledger_index=data.get("ledger_index", "herd-routes/run"),
    )


def _cmd_run(args) -> int:
    config = load_config(args.config, seed_override=args.seed)
    result = run(config)
    if args.series_out:
        Path(args.series_out).write_text(result.series_csv())
    if args.ledger_out:
        Path(args.ledger_out).write_text(result.ledger_json() + "\n")
    last = result.series[-1] if result.series else None
    print(f"run complete: {len(result.series)} steps, "
          f"{len(result.ledger)} ledger messages"
          + (f", final price {last.price:.2f}, agents_on {last.agents_on}"
             if last else ""))
    return 0


def _cmd_serve(args) -> int:
    from . import hil

    config = load_config(args.config, seed_override=args.seed)
    config.hil_enabled = True
    host, _, port = args.listen.rpartition(":")
    sim = Simulation(config)
    static = Path(args.static) if args.static else None
    server = hil.serve(sim, host or "127.0.0.1", int(port),
                       http_port=args.http_port, ws_port=args.ws_port,
                       static_dir=static, tick_seconds=args.tick)
    print(f"serving on {args.listen} (tcp)"
          + (f", ws :{args.ws_port}" if args.ws_port else "")
          + (f", http :{args.http_port}" if args.http_port else ""))
    try:
        while True:
            import time
            time.sleep(1)
    except KeyboardInterrupt:
        server.stop()
    return 0


def _cmd_netgen(args) -> int:
    net = generate_grid(args.rows, args.cols, args.spacing,
                        GeoPoint(args.lat, args.lon))
    save_network(net, args.out)
    print(f"wrote {args.rows}x{args.cols} grid "
          f"({len(net.nodes)} nodes, {len(net.edges)} edges) to {args.out}")
    return 0


def _cmd_experiment(args) -> int:
    config = load_config(args.config)
    if args.kind == "controller":
        run_controller_experiment(config, runs=args.runs, out_dir=args.out)
        print(f"controller experiment done, series in {args.out}")
    else:
        report = run_metrics_experiment(config, cycles=args.cycles,
                                        out_dir=args.out)
        print(json.dumps(report.to_dict(), indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="herd-sim")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="execute one deterministic run")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--ledger-out")
    p.add_argument("--series-out")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("serve", help="run with the human-in-the-loop server")
    p.add_argument("--config", required=True)
    p.add_argument("--listen", default="127.0.0.1:8765")
    p.add_argument("--ws-port", type=int, default=8767)
    p.add_argument("--http-port", type=int, default=8766)
    p.add_argument("--static", help="directory with the web client build")
    p.add_argument("--tick", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("netgen", help="generate a grid network JSON file")
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--cols", type=int, required=True)
    p.add_argument("--spacing", type=float, required=True)
    p.add_argument("--lat", type=float, default=51.4974)
    p.add_argument("--lon", type=float, default=-0.1776)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_netgen)

    p = sub.add_parser("experiment", help="run an evaluation protocol")
    p.add_argument("kind", choices=["controller", "metrics"])
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--cycles", type=int, default=125)
    p.set_defaults(func=_cmd_experiment)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
