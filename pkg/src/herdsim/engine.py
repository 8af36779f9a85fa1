"""Simulation engine: main loop, pricing epochs, rerouting and checkpointing.

The loop is single threaded and deterministic for a given config and seed.
External (human) participants enter through explicit hook methods that the
serving layer calls between steps; they contribute to the occupancy count
and post checkpoints but never consume the simulation's decision PRNG.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from typing import NamedTuple

from . import ledger as ledger_mod
from .agents import (
    ON_ROUTE_STATUSES,
    ROUTE_COMPLETED,
    Agent,
    DecisionCurve,
    Status,
    advance,
    assign_route,
    decide,
    spawn_agents,
)
from .ledger import LedgerUnhealthyError, MockTangle
from .network import (
    RoadNetwork,
    Route,
    UnreachableError,
    cartesian_to_geo,
    geo_to_cartesian,
    nearest_edge,
    point_at,
)
from .network import shortest_path as net_shortest_path
from .pricing import ControllerState, compute_error, update_price

_EPS = 1e-9

DEFAULT_OFF_MAP_DISTANCE_M = 250.0


class ConfigError(ValueError):
    pass


class ExpiredDecisionError(RuntimeError):
    """Decision referenced a superseded pricing epoch."""


class OffMapError(ValueError):
    """Reported position is too far from every pedestrian edge."""


@dataclass(frozen=True)
class IncentivisedRoute:
    route_id: str
    route: Route
    # cumulative length of the route before each edge index
    cum_before: tuple[float, ...]


class StepRecord(NamedTuple):
    step: int
    price: float
    error: float
    agents_on: int
    active: int


@dataclass
class SimConfig:
    network: RoadNetwork
    n_agents: int
    n_steps: int
    seed: int
    incentivised_routes: list[list[str]] = field(default_factory=list)
    price_interval: int = 10
    controller: ControllerState = field(
        default_factory=lambda: ControllerState(fixed_demand=180))
    decision_curve: DecisionCurve = field(default_factory=DecisionCurve)
    waypoint_spacing: float = 50.0
    hil_enabled: bool = False
    sticky_commitment: bool = False
    ledger_index: str = "herd-routes/run"
    off_map_distance: float = DEFAULT_OFF_MAP_DISTANCE_M

    def validate(self) -> list[IncentivisedRoute]:
        if self.n_steps < 0:
            raise ConfigError("n_steps must be >= 0")
        if self.n_agents < 0:
            raise ConfigError("n_agents must be >= 0")
        if self.price_interval < 1:
            raise ConfigError("price_interval must be >= 1")
        if self.waypoint_spacing <= 0:
            raise ConfigError("waypoint_spacing must be positive")
        if not self.network._ped_edge_ids:
            raise ConfigError("network has no pedestrian edges")
        routes = []
        for i, edge_ids in enumerate(self.incentivised_routes):
            if not edge_ids:
                raise ConfigError(f"incentivised route {i} is empty")
            prev = None
            total = 0.0
            cum = []
            for edge_id in edge_ids:
                edge = self.network.edges.get(edge_id)
                if edge is None:
                    raise ConfigError(
                        f"incentivised route {i} references unknown edge {edge_id!r}")
                if not edge.pedestrian_allowed:
                    raise ConfigError(
                        f"incentivised route {i} uses non-pedestrian edge {edge_id!r}")
                if prev is not None and edge.from_node != prev.to_node:
                    raise ConfigError(
                        f"incentivised route {i} is not connected at {edge_id!r}")
                cum.append(total)
                total += edge.length
                prev = edge
            last_len = self.network.edges[edge_ids[-1]].length
            routes.append(IncentivisedRoute(
                route_id=f"ir-{i}",
                route=Route(tuple(edge_ids), 0.0, last_len, total),
                cum_before=tuple(cum)))
        return routes


@dataclass
class SimResult:
    """Immutable outcome of a run: series, events, ledger, payment basis."""

    n_agents: int
    series: list[StepRecord]
    events: list[tuple]
    ledger: MockTangle
    checkpoint_counts: dict[str, int]
    final_statuses: dict[str, Status]

    def series_csv(self) -> str:
        lines = ["step,price,error,agents_on"]
        for rec in self.series:
            lines.append(f"{rec.step},{rec.price!r},{rec.error!r},{rec.agents_on}")
        return "\n".join(lines) + "\n"

    def ledger_json(self) -> str:
        return ledger_mod.dump_json(self.ledger)


class Simulation:
    """A running simulation; construct from a config, then call step()."""

    def __init__(self, config: SimConfig):
        self.irs = config.validate()
        self.config = config
        self.net = config.network
        self.curve = config.decision_curve
        self.rng = random.Random(config.seed)
        self.agents: list[Agent] = spawn_agents(self.net, config.n_agents, self.rng)
        self.ledger = MockTangle()
        self.events: list[tuple] = []
        self.series: list[StepRecord] = []
        self.step_count = 0
        self._ext_counter = 0
        self._hil_rng: random.Random | None = None
        self.last_step_repriced = False

        # initial price: one controller update from zero histories
        self.controller = replace(config.controller, e_history=0.0, pi_history=0.0)
        e0 = compute_error(self.controller, 0)
        self.price, self.controller = update_price(self.controller, e0)
        self.epoch_step = 0
        self._last_epoch_price = self.price

        # initial decision sweep
        if self.irs:
            for agent in self.agents:
                if decide(self.price, self.curve, self.rng):
                    self._accept(agent, 0)
        self.agents_on = self._count_on()

    # -- helpers ---------------------------------------------------------

    def _count_on(self) -> int:
        return sum(1 for a in self.agents if a.status in ON_ROUTE_STATUSES)

    def _ir_by_id(self, route_id: str) -> IncentivisedRoute:
        return self.irs[int(route_id.split("-")[1])]

    def _accept(self, agent: Agent, step: int) -> None:
        """Normal agent accepted the price: route it toward a random IR."""
        ir = self.irs[self.rng.randrange(len(self.irs))]
        try:
            approach = net_shortest_path(
                self.net, (agent.edge_id, agent.offset),
                (ir.route.edge_sequence[0], 0.0))
        except UnreachableError:
            self.events.append((step, agent.agent_id, "accept_unreachable", ir.route_id))
            return
        agent.chosen_incentivised_route = ir.route_id
        agent.status = Status.TO_INCENTIVISED
        assign_route(agent, approach)
        self.events.append((step, agent.agent_id, "accept", ir.route_id))

    def _decline(self, agent: Agent, step: int) -> None:
        """On-route agent declined the new price: back to its own journey."""
        agent.status = Status.NORMAL
        agent.chosen_incentivised_route = None
        route = net_shortest_path(
            self.net, (agent.edge_id, agent.offset), agent.destination)
        assign_route(agent, route)
        self.events.append((step, agent.agent_id, "decline", None))

    def _post_checkpoint(self, agent: Agent, step: int) -> str | None:
        cart = point_at(self.net, agent.edge_id, agent.offset)
        geo = cartesian_to_geo(self.net, cart)
        try:
            mid = ledger_mod.post_checkpoint(
                self.ledger, self.config.ledger_index, agent.agent_id,
                cart, geo, step)
        except LedgerUnhealthyError:
            self.events.append((step, agent.agent_id, "checkpoint_failed", None))
            return None
        agent.checkpoints_passed += 1
        self.events.append((step, agent.agent_id, "checkpoint", mid))
        return mid

    def _enter_incentivised(self, agent: Agent, step: int) -> list[str]:
        ir = self._ir_by_id(agent.chosen_incentivised_route)
        agent.status = Status.ON_INCENTIVISED
        assign_route(agent, ir.route)
        agent.ir_progress = 0.0
        agent.next_waypoint = self.config.waypoint_spacing
        self.events.append((step, agent.agent_id, "enter_incentivised", ir.route_id))
        mid = self._post_checkpoint(agent, step)
        return [mid] if mid else []

    def _cross_waypoints(self, agent: Agent, step: int) -> list[str]:
        """Post a checkpoint for every waypoint newly covered by ir_progress."""
        ir = self._ir_by_id(agent.chosen_incentivised_route)
        total = ir.route.total_length
        posted = []
        while agent.next_waypoint <= min(agent.ir_progress, total) + _EPS:
            mid = self._post_checkpoint(agent, step)
            if mid:
                posted.append(mid)
            agent.next_waypoint += self.config.waypoint_spacing
        return posted

    def _complete_incentivised(self, agent: Agent, step: int) -> list[str]:
        """Route end reached: post the endpoint checkpoint, head home."""
        ir = self._ir_by_id(agent.chosen_incentivised_route)
        posted = []
        agent.ir_progress = ir.route.total_length
        posted.extend(self._cross_waypoints(agent, step))
        # endpoint is a waypoint even when not on the spacing lattice
        if agent.next_waypoint - self.config.waypoint_spacing < ir.route.total_length - _EPS:
            mid = self._post_checkpoint(agent, step)
            if mid:
                posted.append(mid)
        self.events.append((step, agent.agent_id, "complete_incentivised", ir.route_id))
        agent.chosen_incentivised_route = None
        if agent.is_external:
            agent.status = Status.NORMAL
        else:
            agent.status = Status.RETURNING
            route = net_shortest_path(
                self.net, (agent.edge_id, agent.offset), agent.destination)
            assign_route(agent, route)
        return posted

    # -- spec operations ---------------------------------------------------

    def repricing_epoch(self, step: int) -> None:
        e = compute_error(self.controller, self.agents_on)
        self.price, self.controller = update_price(self.controller, e)
        changed = self.price != self._last_epoch_price
        self._last_epoch_price = self.price
        self.epoch_step = step
        self.events.append((step, None, "epoch", self.price))
        if changed and self.irs:
            for agent in self.agents:
                if agent.is_external or agent.status is Status.ARRIVED:
                    continue
                yes = decide(self.price, self.curve, self.rng)
                if yes and agent.status is Status.NORMAL:
                    self._accept(agent, step)
                elif (not yes and agent.status in ON_ROUTE_STATUSES
                        and not self.config.sticky_commitment):
                    self._decline(agent, step)
            self.agents_on = self._count_on()

    def step(self) -> None:
        """Advance the world by one simulated second."""
        k = self.step_count
        interval = self.config.price_interval
        self.last_step_repriced = False
        if k > 0 and k % interval == 0:
            self.repricing_epoch(k)
            self.last_step_repriced = True
        spacing = self.config.waypoint_spacing
        for agent in self.agents:
            if agent.status is Status.ARRIVED:
                continue
            if agent.is_external:
                continue  # externals move via reported positions
            was_on_ir = agent.status is Status.ON_INCENTIVISED
            events = advance(agent, self.net, 1.0)
            if was_on_ir:
                agent.ir_progress += agent.speed  # dt = 1 s
            completed = events and events[-1][0] == ROUTE_COMPLETED
            if agent.status is Status.ARRIVED:
                self.events.append((k, agent.agent_id, "arrived", None))
                continue
            if was_on_ir:
                if completed:
                    self._complete_incentivised(agent, k)
                else:
                    self._cross_waypoints(agent, k)
            elif completed and agent.status is Status.TO_INCENTIVISED:
                self._enter_incentivised(agent, k)
        self.agents_on = self._count_on()
        active = sum(1 for a in self.agents if a.status is not Status.ARRIVED)
        error = self.controller.fixed_demand - self.agents_on
        self.series.append(StepRecord(k, self.price, error, self.agents_on, active))
        self.step_count = k + 1

    def run_to_end(self) -> None:
        for _ in range(self.config.n_steps):
            self.step()

    def result(self) -> SimResult:
        return SimResult(
            n_agents=self.config.n_agents,
            series=list(self.series),
            events=list(self.events),
            ledger=self.ledger,
            checkpoint_counts={a.agent_id: a.checkpoints_passed
                               for a in self.agents if a.checkpoints_passed},
            final_statuses={a.agent_id: a.status for a in self.agents},
        )

    # -- external (human-in-the-loop) hooks --------------------------------
    # These never touch self.rng, so a run with zero participants is
    # bit-identical to one with HIL disabled.

    def add_external(self) -> Agent:
        agent = Agent(
            agent_id=f"ext-{self._ext_counter}", origin=None, destination=None,
            current_route=None, edge_id=None, offset=0.0, is_external=True)
        self._ext_counter += 1
        self.agents.append(agent)
        self.events.append((self.step_count, agent.agent_id, "joined", None))
        return agent

    def remove_external(self, agent: Agent) -> None:
        agent.status = Status.ARRIVED
        agent.chosen_incentivised_route = None
        self.events.append((self.step_count, agent.agent_id, "left", None))
        self.agents_on = self._count_on()

    def place_external(self, agent: Agent, geo) -> list[str]:
        """Snap a reported GPS position onto the network.

        Returns message ids of any checkpoints posted by waypoint crossings.
        """
        cart = geo_to_cartesian(self.net, geo)
        edge_id, offset, dist = nearest_edge(self.net, cart)
        if dist > self.config.off_map_distance:
            raise OffMapError(
                f"position {dist:.0f} m from nearest pedestrian edge")
        agent.edge_id = edge_id
        agent.offset = offset
        step = self.step_count
        if agent.status is Status.TO_INCENTIVISED:
            ir = self._ir_by_id(agent.chosen_incentivised_route)
            if edge_id in ir.route.edge_sequence:
                agent.status = Status.ON_INCENTIVISED
                agent.ir_progress = 0.0
                agent.next_waypoint = 0.0
                self.events.append(
                    (step, agent.agent_id, "enter_incentivised", ir.route_id))
        posted: list[str] = []
        if agent.status is Status.ON_INCENTIVISED:
            ir = self._ir_by_id(agent.chosen_incentivised_route)
            seq = ir.route.edge_sequence
            if edge_id in seq:
                progress = ir.cum_before[seq.index(edge_id)] + offset
                if progress > agent.ir_progress:
                    agent.ir_progress = progress
                posted = self._cross_waypoints(agent, step)
                if agent.ir_progress >= ir.route.total_length - _EPS:
                    posted.extend(self._complete_incentivised(agent, step))
        self.agents_on = self._count_on()
        return posted

    def apply_external_decision(self, agent: Agent, accept: bool,
                                epoch_step: int) -> IncentivisedRoute | None:
        """Apply a human accept/decline for the current pricing epoch."""
        if epoch_step != self.epoch_step:
            raise ExpiredDecisionError(
                f"decision for epoch {epoch_step}, current is {self.epoch_step}")
        if accept:
            if not self.irs:
                raise ConfigError("no incentivised routes configured")
            if self._hil_rng is None:
                self._hil_rng = random.Random(self.config.seed ^ 0x48494C)
            ir = self.irs[self._hil_rng.randrange(len(self.irs))]
            agent.chosen_incentivised_route = ir.route_id
            agent.status = Status.TO_INCENTIVISED
            self.events.append(
                (self.step_count, agent.agent_id, "accept", ir.route_id))
            self.agents_on = self._count_on()
            return ir
        if agent.status in ON_ROUTE_STATUSES:
            agent.status = Status.NORMAL
            agent.chosen_incentivised_route = None
            self.events.append((self.step_count, agent.agent_id, "decline", None))
            self.agents_on = self._count_on()
        return None

    def waypoint_geopoints(self, ir: IncentivisedRoute) -> list:
        """Ordered waypoint positions of a route, as geo points."""
        points = []
        spacing = self.config.waypoint_spacing
        total = ir.route.total_length
        seq = ir.route.edge_sequence
        d = 0.0
        while d < total - _EPS:
            points.append(d)
            d += spacing
        points.append(total)
        geos = []
        for dist in points:
            idx = 0
            for i, start in enumerate(ir.cum_before):
                if start <= dist + _EPS:
                    idx = i
            edge_id = seq[idx]
            offset = min(dist - ir.cum_before[idx], self.net.edges[edge_id].length)
            cart = point_at(self.net, edge_id, offset)
            geos.append(cartesian_to_geo(self.net, cart))
        return geos


def initialize(config: SimConfig) -> Simulation:
    return Simulation(config)


def run(config: SimConfig) -> SimResult:
    """Execute a full deterministic run: initialize plus n_steps steps."""
    sim = Simulation(config)
    sim.run_to_end()
    return sim.result()
