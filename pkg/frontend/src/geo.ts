/** Equirectangular projection around the network's geographic origin.
 *
 * Mirrors the server: y = R * dLat(rad), x = R * dLon(rad) * cos(lat0).
 */
import type { GeoPoint } from "./protocol";

export const EARTH_RADIUS_M = 6_371_000;

export interface CartesianPoint {
  x: number;
  y: number;
}

const RAD = Math.PI / 180;

export function project(origin: GeoPoint, p: GeoPoint): CartesianPoint {
  return {
    x: EARTH_RADIUS_M * (p.lon - origin.lon) * RAD * Math.cos(origin.lat * RAD),
    y: EARTH_RADIUS_M * (p.lat - origin.lat) * RAD,
  };
}

export function unproject(origin: GeoPoint, p: CartesianPoint): GeoPoint {
  return {
    lat: origin.lat + p.y / EARTH_RADIUS_M / RAD,
    lon: origin.lon + p.x / (EARTH_RADIUS_M * Math.cos(origin.lat * RAD)) / RAD,
  };
}
