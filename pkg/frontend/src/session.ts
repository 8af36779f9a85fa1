/** Transport-agnostic client session state machine.
 *
 * All knowledge about the session comes from server frames; this store
 * never fabricates state (e.g. it does not assume a join succeeded until
 * the "joined" frame arrives, and it only opens a decision window when a
 * "price" frame carries an epoch step).
 */
import type { ClientMessage, GeoPoint, ServerMessage } from "./protocol";
import { serialize } from "./protocol";

export type Transport = (frame: string) => void;

export interface ActiveRoute {
  routeId: string;
  waypoints: GeoPoint[];
}

export interface CheckpointRecord {
  messageId: string;
  step: number;
}

export interface SessionState {
  status: "idle" | "joining" | "joined";
  agentId: string | null;
  price: number | null;
  epochStep: number | null;
  /** Epoch step of an open, unanswered decision window. */
  pendingEpoch: number | null;
  route: ActiveRoute | null;
  checkpoints: CheckpointRecord[];
  lastError: string | null;
}

export class SessionStore {
  private transport: Transport;
  private listeners: Array<() => void> = [];

  state: SessionState = {
    status: "idle",
    agentId: null,
    price: null,
    epochStep: null,
    pendingEpoch: null,
    route: null,
    checkpoints: [],
    lastError: null,
  };

  constructor(transport: Transport) {
    this.transport = transport;
  }

  onChange(listener: () => void): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const l of this.listeners) l();
  }

  private send(msg: ClientMessage): void {
    this.transport(serialize(msg));
  }

  join(name: string): void {
    if (this.state.status !== "idle") return;
    this.state.status = "joining";
    this.send({ type: "join", name });
    this.notify();
  }

  leave(): void {
    if (this.state.status === "idle") return;
    this.send({ type: "leave" });
    this.state = {
      status: "idle",
      agentId: null,
      price: null,
      epochStep: null,
      pendingEpoch: null,
      route: null,
      checkpoints: [],
      lastError: null,
    };
    this.notify();
  }

  reportPosition(lat: number, lon: number, ts: number): void {
    if (this.state.status !== "joined") return;
    this.send({ type: "position", lat, lon, ts });
  }

  /** True while an unanswered price offer is open. */
  canDecide(): boolean {
    return this.state.status === "joined" && this.state.pendingEpoch !== null;
  }

  decide(accept: boolean): void {
    const epoch = this.state.pendingEpoch;
    if (this.state.status !== "joined" || epoch === null) return;
    this.send({ type: "decision", accept, epoch_step: epoch });
    this.state.pendingEpoch = null;
    this.notify();
  }

  handleMessage(msg: ServerMessage): void {
    switch (msg.type) {
      case "joined":
        this.state.status = "joined";
        this.state.agentId = msg.agent_id;
        this.state.price = msg.price;
        this.state.lastError = null;
        break;
      case "price":
        this.state.price = msg.value;
        this.state.epochStep = msg.epoch_step;
        this.state.pendingEpoch = msg.epoch_step;
        break;
      case "route":
        this.state.route = { routeId: msg.route_id, waypoints: msg.waypoints };
        this.state.checkpoints = [];
        break;
      case "checkpoint":
        this.state.checkpoints.push({ messageId: msg.message_id, step: msg.step });
        break;
      case "error":
        this.state.lastError = msg.reason;
        // A rejected join never produced a session on the server.
        if (this.state.status === "joining" && msg.reason !== "already-joined") {
          this.state.status = "idle";
        }
        break;
    }
    this.notify();
  }

  /** Waypoints confirmed so far, derived from checkpoint count. */
  waypointsPassed(): number {
    if (this.state.route === null) return 0;
    return Math.min(this.state.checkpoints.length, this.state.route.waypoints.length);
  }
}
