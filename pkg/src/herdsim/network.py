"""Road network model: JSON loading, grid generation, projection and routing.

Networks are directed graphs of nodes (cartesian metres) and edges with a
pedestrian permission flag, anchored to a geographic origin so that GPS
positions can be projected into the local frame. Networks are immutable
after construction and safe for concurrent reads.
"""
from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass

EARTH_RADIUS_M = 6_371_000.0
_DEG = math.pi / 180.0

# edge length must agree with the euclidean node distance to 0.1%
_LENGTH_TOLERANCE = 1e-3


class NetworkError(ValueError):
    """Malformed or invariant-violating network data."""


class UnreachableError(NetworkError):
    """No pedestrian path connects the requested positions."""


@dataclass(frozen=True)
class GeoPoint:
    lat: float
    lon: float

    def __post_init__(self):
        if not (-90.0 <= self.lat <= 90.0 and -180.0 <= self.lon <= 180.0):
            raise NetworkError(f"geo point out of range: ({self.lat}, {self.lon})")


@dataclass(frozen=True)
class CartesianPoint:
    x: float
    y: float


@dataclass(frozen=True)
class Node:
    node_id: str
    x: float
    y: float


@dataclass(frozen=True)
class Edge:
    edge_id: str
    from_node: str
    to_node: str
    length: float
    pedestrian_allowed: bool


@dataclass(frozen=True)
class Route:
    """A connected walk: edge ids plus offsets on the first and last edge."""

    edge_sequence: tuple[str, ...]
    start_offset: float
    end_offset: float
    total_length: float


class RoadNetwork:
    """Validated, immutable road network."""

    def __init__(self, nodes, edges, geo_origin: GeoPoint):
        self.nodes = {}
        for node in nodes:
            if node.node_id in self.nodes:
                raise NetworkError(f"duplicate node id {node.node_id!r}")
            self.nodes[node.node_id] = node
        self.edges = {}
        for edge in edges:
            if edge.edge_id in self.edges:
                raise NetworkError(f"duplicate edge id {edge.edge_id!r}")
            for ref in (edge.from_node, edge.to_node):
                if ref not in self.nodes:
                    raise NetworkError(
                        f"edge {edge.edge_id!r} references missing node {ref!r}")
            if edge.length <= 0:
                raise NetworkError(f"edge {edge.edge_id!r} has non-positive length")
            a, b = self.nodes[edge.from_node], self.nodes[edge.to_node]
            euclid = math.hypot(b.x - a.x, b.y - a.y)
            if abs(edge.length - euclid) > _LENGTH_TOLERANCE * max(euclid, edge.length):
                raise NetworkError(
                    f"edge {edge.edge_id!r} length {edge.length} deviates more than "
                    f"0.1% from node distance {euclid}")
            self.edges[edge.edge_id] = edge
        self.geo_origin = geo_origin
        # pedestrian adjacency, neighbours sorted by edge id for determinism
        self._out: dict[str, list[Edge]] = {nid: [] for nid in self.nodes}
        for edge in self.edges.values():
            if edge.pedestrian_allowed:
                self._out[edge.from_node].append(edge)
        for lst in self._out.values():
            lst.sort(key=lambda e: e.edge_id)
        self._ped_edge_ids = sorted(
            e.edge_id for e in self.edges.values() if e.pedestrian_allowed)
        self._route_table: dict[str, dict[str, tuple[float, tuple[str, ...]]]] = {}

    def edge(self, edge_id: str) -> Edge:
        return self.edges[edge_id]

    def node(self, node_id: str) -> Node:
        return self.nodes[node_id]

    def __eq__(self, other):
        if not isinstance(other, RoadNetwork):
            return NotImplemented
        return (self.nodes == other.nodes and self.edges == other.edges
                and self.geo_origin == other.geo_origin)

    def to_dict(self) -> dict:
        return {
            "geo_origin": {"lat": self.geo_origin.lat, "lon": self.geo_origin.lon},
            "nodes": [{"id": n.node_id, "x": n.x, "y": n.y}
                      for n in self.nodes.values()],
            "edges": [{"id": e.edge_id, "from": e.from_node, "to": e.to_node,
                       "length": e.length, "pedestrian": e.pedestrian_allowed}
                      for e in self.edges.values()],
        }

    # -- routing ---------------------------------------------------------

    def _routes_from(self, src: str) -> dict[str, tuple[float, tuple[str, ...]]]:
        """Shortest pedestrian paths from a node, lexicographic tie-break."""
        cached = self._route_table.get(src)
        if cached is not None:
            return cached
        best: dict[str, tuple[float, tuple[str, ...]]] = {src: (0.0, ())}
        heap: list[tuple[float, tuple[str, ...], str]] = [(0.0, (), src)]
        done: set[str] = set()
        while heap:
            dist, path, node = heapq.heappop(heap)
            if node in done:
                continue
            done.add(node)
            best[node] = (dist, path)
            for edge in self._out[node]:
                if edge.to_node in done:
                    continue
                cand = (dist + edge.length, path + (edge.edge_id,))
                known = best.get(edge.to_node)
                if known is None or cand < known:
                    best[edge.to_node] = cand
                    heapq.heappush(heap, (cand[0], cand[1], edge.to_node))
        self._route_table[src] = {n: best[n] for n in done}
        return self._route_table[src]


def load_network(path) -> RoadNetwork:
    """Load and validate a network JSON file."""
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise NetworkError(f"parse error in {path}: {exc}") from exc
    return network_from_dict(data)


def network_from_dict(data: dict) -> RoadNetwork:
    try:
        origin = GeoPoint(data["geo_origin"]["lat"], data["geo_origin"]["lon"])
        nodes = [Node(n["id"], float(n["x"]), float(n["y"])) for n in data["nodes"]]
        edges = [Edge(e["id"], e["from"], e["to"], float(e["length"]),
                      bool(e["pedestrian"])) for e in data["edges"]]
    except (KeyError, TypeError) as exc:
        raise NetworkError(f"malformed network JSON: missing {exc}") from exc
    return RoadNetwork(nodes, edges, origin)


def save_network(net: RoadNetwork, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(net.to_dict(), fh, indent=2)
        fh.write("\n")


def generate_grid(rows: int, cols: int, spacing: float,
                  geo_origin: GeoPoint = GeoPoint(51.4974, -0.1776)) -> RoadNetwork:
    """Rows x cols lattice with bidirectional pedestrian edges between neighbours."""
    if rows < 2 or cols < 2:
        raise NetworkError(f"grid must be at least 2x2, got {rows}x{cols}")
    if spacing <= 0:
        raise NetworkError("grid spacing must be positive")
    nodes = [Node(f"n{r}_{c}", c * spacing, r * spacing)
             for r in range(rows) for c in range(cols)]
    edges = []

    def link(u, v):
        edges.append(Edge(f"{u}~{v}", u, v, float(spacing), True))
        edges.append(Edge(f"{v}~{u}", v, u, float(spacing), True))

    for r in range(rows):
        for c in range(cols):
            if c + 1 < cols:
                link(f"n{r}_{c}", f"n{r}_{c + 1}")
            if r + 1 < rows:
                link(f"n{r}_{c}", f"n{r + 1}_{c}")
    return RoadNetwork(nodes, edges, geo_origin)


def pedestrian_edges(net: RoadNetwork) -> list[str]:
    """Ids of pedestrian-permitted edges, sorted."""
    return list(net._ped_edge_ids)


def geo_to_cartesian(net: RoadNetwork, p: GeoPoint) -> CartesianPoint:
    """Equirectangular local projection about the network's geo origin."""
    lat0 = net.geo_origin.lat
    y = EARTH_RADIUS_M * (p.lat - lat0) * _DEG
    x = EARTH_RADIUS_M * (p.lon - net.geo_origin.lon) * _DEG * math.cos(lat0 * _DEG)
    return CartesianPoint(x, y)


def cartesian_to_geo(net: RoadNetwork, p: CartesianPoint) -> GeoPoint:
    lat0 = net.geo_origin.lat
    lat = lat0 + p.y / (EARTH_RADIUS_M * _DEG)
    lon = net.geo_origin.lon + p.x / (EARTH_RADIUS_M * _DEG * math.cos(lat0 * _DEG))
    return GeoPoint(lat, lon)


def point_at(net: RoadNetwork, edge_id: str, offset: float) -> CartesianPoint:
    """Cartesian coordinates of a position (edge, offset along it)."""
    edge = net.edges[edge_id]
    a, b = net.nodes[edge.from_node], net.nodes[edge.to_node]
    t = offset / edge.length
    return CartesianPoint(a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t)


def nearest_edge(net: RoadNetwork, p: CartesianPoint) -> tuple[str, float, float]:
    """Closest pedestrian edge to a point: (edge_id, offset, distance).

    Distances within 1e-9 m count as ties, broken by smallest edge id
    (edge ids are scanned in sorted order); the tolerance keeps the winner
    stable when a point sits exactly on a segment shared by an edge and
    its reverse.
    """
    if not net._ped_edge_ids:
        raise NetworkError("network has no pedestrian edges")
    best = None
    for edge_id in net._ped_edge_ids:
        edge = net.edges[edge_id]
        a, b = net.nodes[edge.from_node], net.nodes[edge.to_node]
        dx, dy = b.x - a.x, b.y - a.y
        t = ((p.x - a.x) * dx + (p.y - a.y) * dy) / (dx * dx + dy * dy)
        t = min(1.0, max(0.0, t))
        px, py = a.x + t * dx, a.y + t * dy
        dist = math.hypot(p.x - px, p.y - py)
        if best is None or dist < best[2] - 1e-9:
            best = (edge_id, t * edge.length, dist)
    return best


def shortest_path(net: RoadNetwork, from_pos: tuple[str, float],
                  to_pos: tuple[str, float]) -> Route:
    """Minimum-length pedestrian route between two on-edge positions.

    Ties between equal-length paths are broken by the lexicographically
    smallest edge-id sequence.
    """
    from_edge, from_off = from_pos
    to_edge, to_off = to_pos
    for edge_id, off in (from_pos, to_pos):
        edge = net.edges.get(edge_id)
        if edge is None:
            raise NetworkError(f"unknown edge {edge_id!r}")
        if not edge.pedestrian_allowed:
            raise NetworkError(f"edge {edge_id!r} is not pedestrian allowed")
        if not 0.0 <= off <= edge.length:
            raise NetworkError(f"offset {off} outside edge {edge_id!r}")

    candidates: list[tuple[float, tuple[str, ...]]] = []
    if from_edge == to_edge and to_off >= from_off:
        candidates.append((to_off - from_off, (from_edge,)))
    src = net.edges[from_edge].to_node
    dst = net.edges[to_edge].from_node
    hop = net._routes_from(src).get(dst)
    if hop is not None:
        head = net.edges[from_edge].length - from_off
        candidates.append((head + hop[0] + to_off,
                           (from_edge,) + hop[1] + (to_edge,)))
    if not candidates:
        raise UnreachableError(
            f"no pedestrian path from {from_pos} to {to_pos}")
    length, seq = min(candidates)
    return Route(seq, from_off, to_off, length)
