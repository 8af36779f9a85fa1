/** Wire protocol: one JSON object per WebSocket frame, UTF-8. */

export interface GeoPoint {
  lat: number;
  lon: number;
}

// client -> server
export type ClientMessage =
  | { type: "join"; name: string }
  | { type: "position"; lat: number; lon: number; ts: number }
  | { type: "decision"; accept: boolean; epoch_step: number }
  | { type: "leave" };

// server -> client
export type ServerMessage =
  | { type: "joined"; agent_id: string; price: number; step: number }
  | { type: "price"; value: number; epoch_step: number }
  | { type: "route"; route_id: string; waypoints: GeoPoint[] }
  | { type: "checkpoint"; message_id: string; step: number }
  | { type: "error"; reason: string };

const SERVER_TYPES = new Set(["joined", "price", "route", "checkpoint", "error"]);

/** Parse one inbound frame; returns null for anything malformed or unknown. */
export function parseServerMessage(raw: string): ServerMessage | null {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof data !== "object" || data === null) return null;
  const type = (data as { type?: unknown }).type;
  if (typeof type !== "string" || !SERVER_TYPES.has(type)) return null;
  return data as ServerMessage;
}

export function serialize(msg: ClientMessage): string {
  return JSON.stringify(msg);
}
