/** The network JSON served by the simulator's static endpoint. */

export interface NetworkNode {
  id: string;
  x: number;
  y: number;
}

export interface NetworkEdge {
  id: string;
  from: string;
  to: string;
  length: number;
  pedestrian: boolean;
}

export interface RoadNetwork {
  geo_origin: { lat: number; lon: number };
  nodes: NetworkNode[];
  edges: NetworkEdge[];
}

export interface SnappedPoint {
  edgeId: string;
  x: number;
  y: number;
  distance: number;
}

/**
 * Snap a world-coordinate point onto the nearest pedestrian edge.
 * Used by click-to-walk: the click becomes the position we report.
 */
export function snapToNetwork(
  net: RoadNetwork,
  x: number,
  y: number,
): SnappedPoint | null {
  const byId = new Map(net.nodes.map((n) => [n.id, n]));
  let best: SnappedPoint | null = null;
  for (const edge of net.edges) {
    if (!edge.pedestrian) continue;
    const a = byId.get(edge.from);
    const b = byId.get(edge.to);
    if (!a || !b) continue;
    const dx = b.x - a.x;
    const dy = b.y - a.y;
    const t = Math.max(
      0,
      Math.min(1, ((x - a.x) * dx + (y - a.y) * dy) / (dx * dx + dy * dy)),
    );
    const px = a.x + t * dx;
    const py = a.y + t * dy;
    const distance = Math.hypot(x - px, y - py);
    if (best === null || distance < best.distance) {
      best = { edgeId: edge.id, x: px, y: py, distance };
    }
  }
  return best;
}

/** Axis-aligned bounds of the node coordinates, for fitting the canvas. */
export function networkBounds(net: RoadNetwork) {
  const xs = net.nodes.map((n) => n.x);
  const ys = net.nodes.map((n) => n.y);
  return {
    minX: Math.min(...xs),
    maxX: Math.max(...xs),
    minY: Math.min(...ys),
    maxY: Math.max(...ys),
  };
}
