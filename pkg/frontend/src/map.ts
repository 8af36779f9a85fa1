/** Canvas renderer for the road network, the active route, and the walker. */
import type { GeoPoint } from "./protocol";
import type { RoadNetwork } from "./network";
import { networkBounds } from "./network";
import { project } from "./geo";

const PADDING = 24;

export interface MapView {
  /** world -> canvas */
  toCanvas(x: number, y: number): [number, number];
  /** canvas -> world */
  toWorld(cx: number, cy: number): [number, number];
}

export function makeView(net: RoadNetwork, width: number, height: number): MapView {
  const b = networkBounds(net);
  const spanX = Math.max(b.maxX - b.minX, 1);
  const spanY = Math.max(b.maxY - b.minY, 1);
  const scale = Math.min((width - 2 * PADDING) / spanX, (height - 2 * PADDING) / spanY);
  const offX = (width - spanX * scale) / 2;
  const offY = (height - spanY * scale) / 2;
  return {
    toCanvas(x, y) {
      // Flip y: canvas grows downwards, world grows northwards.
      return [offX + (x - b.minX) * scale, height - offY - (y - b.minY) * scale];
    },
    toWorld(cx, cy) {
      return [b.minX + (cx - offX) / scale, b.minY + (height - offY - cy) / scale];
    },
  };
}

export interface MapRenderState {
  route: GeoPoint[] | null;
  waypointsPassed: number;
  walker: { x: number; y: number } | null;
}

export function drawMap(
  ctx: CanvasRenderingContext2D,
  net: RoadNetwork,
  view: MapView,
  state: MapRenderState,
): void {
  const { width, height } = ctx.canvas;
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#11151c";
  ctx.fillRect(0, 0, width, height);

  const nodes = new Map(net.nodes.map((n) => [n.id, n]));

  for (const edge of net.edges) {
    const a = nodes.get(edge.from);
    const b = nodes.get(edge.to);
    if (!a || !b) continue;
    const [ax, ay] = view.toCanvas(a.x, a.y);
    const [bx, by] = view.toCanvas(b.x, b.y);
    ctx.strokeStyle = edge.pedestrian ? "#4a5568" : "#2a2f38";
    ctx.lineWidth = edge.pedestrian ? 3 : 1.5;
    ctx.beginPath();
    ctx.moveTo(ax, ay);
    ctx.lineTo(bx, by);
    ctx.stroke();
  }

  if (state.route !== null && state.route.length > 0) {
    const origin = net.geo_origin;
    const pts = state.route.map((g) => {
      const c = project(origin, g);
      return view.toCanvas(c.x, c.y);
    });
    ctx.strokeStyle = "#f6ad55";
    ctx.lineWidth = 4;
    ctx.beginPath();
    ctx.moveTo(pts[0][0], pts[0][1]);
    for (const [x, y] of pts.slice(1)) ctx.lineTo(x, y);
    ctx.stroke();
    pts.forEach(([x, y], i) => {
      ctx.fillStyle = i < state.waypointsPassed ? "#68d391" : "#f6ad55";
      ctx.beginPath();
      ctx.arc(x, y, 7, 0, 2 * Math.PI);
      ctx.fill();
    });
  }

  if (state.walker !== null) {
    const [x, y] = view.toCanvas(state.walker.x, state.walker.y);
    ctx.fillStyle = "#63b3ed";
    ctx.beginPath();
    ctx.arc(x, y, 6, 0, 2 * Math.PI);
    ctx.fill();
    ctx.strokeStyle = "#fff";
    ctx.lineWidth = 1.5;
    ctx.stroke();
  }
}
