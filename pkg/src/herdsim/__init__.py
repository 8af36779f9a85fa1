"""Pedestrian route-incentivisation simulator.

Closes a dynamic-pricing feedback loop over rational walking agents,
records route checkpoints on an append-only mock ledger, and exposes a
human-in-the-loop server so live participants can join a running run.
"""

from .agents import Agent, DecisionCurve, Status
from .engine import SimConfig, SimResult, Simulation, initialize, run
from .ledger import MockTangle
from .network import (
    GeoPoint,
    RoadNetwork,
    Route,
    generate_grid,
    load_network,
    pedestrian_edges,
    shortest_path,
)
from .pricing import ControllerState, compute_error, update_price

__all__ = [
    "Agent", "DecisionCurve", "Status", "SimConfig", "SimResult",
    "Simulation", "initialize", "run", "MockTangle", "GeoPoint",
    "RoadNetwork", "Route", "generate_grid", "load_network",
    "pedestrian_edges", "shortest_path", "ControllerState",
    "compute_error", "update_price",
]
