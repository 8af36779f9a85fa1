"""Pedestrian agents: spawning, the price-acceptance model, and movement.

Decisions follow the uniform-threshold rule: a draw u ~ Uniform(0, 0.25) is
compared against the acceptance probability for the current token price, so
the effective acceptance chance is min(1, p / 0.25). The draw sequence comes
from ``random.Random`` (Mersenne Twister), the repo-wide PRNG; identical
seeds give identical runs.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum

from .network import RoadNetwork, Route, UnreachableError, shortest_path

WALKING_SPEED_MPS = 1.4
DECISION_DRAW_CAP = 0.25

EDGE_COMPLETED = "edge_completed"
ROUTE_COMPLETED = "route_completed"


class SpawnError(RuntimeError):
    """Could not find a connected origin/destination pair."""


class Status(str, Enum):
    NORMAL = "Normal"
    TO_INCENTIVISED = "ToIncentivised"
    ON_INCENTIVISED = "OnIncentivised"
    RETURNING = "Returning"
    ARRIVED = "Arrived"


ON_ROUTE_STATUSES = (Status.TO_INCENTIVISED, Status.ON_INCENTIVISED)


@dataclass(frozen=True)
class DecisionCurve:
    """Piecewise-linear saturating price-acceptance curve."""

    p_max: float = 0.25
    pi_sat: float = 200.0

    def __post_init__(self):
        if not 0.0 < self.p_max <= 0.25:
            raise ValueError(f"p_max must be in (0, 0.25], got {self.p_max}")
        if self.pi_sat <= 0:
            raise ValueError(f"pi_sat must be positive, got {self.pi_sat}")


@dataclass
class Agent:
    agent_id: str
    origin: tuple[str, float] | None
    destination: tuple[str, float] | None
    current_route: Route | None
    edge_id: str | None
    offset: float
    speed: float = WALKING_SPEED_MPS
    status: Status = Status.NORMAL
    chosen_incentivised_route: str | None = None
    checkpoints_passed: int = 0
    is_external: bool = False
    route_index: int = 0
    # progress bookkeeping while walking an incentivised route
    ir_progress: float = 0.0
    next_waypoint: float = 0.0


def acceptance_probability(price: float, curve: DecisionCurve) -> float:
    """Probability in [0, p_max] that the price is accepted."""
    frac = price / curve.pi_sat
    return min(1.0, max(0.0, frac)) * curve.p_max


def decide(price: float, curve: DecisionCurve, rng: random.Random) -> bool:
    """Uniform(0, 0.25) threshold draw against the acceptance probability."""
    return rng.uniform(0.0, DECISION_DRAW_CAP) < acceptance_probability(price, curve)


def _draw_position(net: RoadNetwork, ped_ids: list[str], lengths: list[float],
                   rng: random.Random) -> tuple[str, float]:
    edge_id = rng.choices(ped_ids, weights=lengths)[0]
    return edge_id, rng.uniform(0.0, net.edges[edge_id].length)


def spawn_agents(net: RoadNetwork, n: int, rng: random.Random,
                 max_attempts: int = 100) -> list[Agent]:
    """n agents with uniform on-edge origins and reachable destinations."""
    ped_ids = list(net._ped_edge_ids)
    if n > 0 and not ped_ids:
        raise SpawnError("network has no pedestrian edges")
    lengths = [net.edges[e].length for e in ped_ids]
    agents = []
    for i in range(n):
        origin = _draw_position(net, ped_ids, lengths, rng)
        route = None
        destination = None
        for _ in range(max_attempts):
            destination = _draw_position(net, ped_ids, lengths, rng)
            try:
                route = shortest_path(net, origin, destination)
                break
            except UnreachableError:
                continue
        if route is None:
            raise SpawnError(
                f"no reachable destination for agent p{i} after {max_attempts} attempts")
        agents.append(Agent(
            agent_id=f"p{i}", origin=origin, destination=destination,
            current_route=route, edge_id=origin[0], offset=origin[1]))
    return agents


def advance(agent: Agent, net: RoadNetwork, dt: float = 1.0) -> list[tuple]:
    """Move the agent speed*dt metres along its route, in place.

    Returns events: ("edge_completed", edge_id) per boundary crossed and
    ("route_completed",) when the route's end offset is reached. Arrived is
    set when the completed route leads to the agent's final destination.
    """
    if agent.status is Status.ARRIVED:
        raise ValueError(f"agent {agent.agent_id} already arrived")
    if dt <= 0:
        raise ValueError("dt must be positive")
    route = agent.current_route
    seq = route.edge_sequence
    last = len(seq) - 1
    remaining = agent.speed * dt
    events: list[tuple] = []
    edges = net.edges
    while True:
        edge_id = seq[agent.route_index]
        edge_end = route.end_offset if agent.route_index == last else edges[edge_id].length
        to_go = edge_end - agent.offset
        if remaining < to_go:
            agent.offset += remaining
            break
        remaining -= to_go
        if agent.route_index == last:
            agent.offset = edge_end
            events.append((ROUTE_COMPLETED,))
            if agent.status in (Status.NORMAL, Status.RETURNING):
                agent.status = Status.ARRIVED
            break
        events.append((EDGE_COMPLETED, edge_id))
        agent.route_index += 1
        agent.edge_id = seq[agent.route_index]
        agent.offset = 0.0
    agent.edge_id = seq[agent.route_index]
    return events


def assign_route(agent: Agent, route: Route) -> None:
    """Point the agent at a new route starting from its current position."""
    agent.current_route = route
    agent.route_index = 0
    agent.edge_id = route.edge_sequence[0]
    agent.offset = route.start_offset
