import { describe, expect, it } from "vitest";
import { EARTH_RADIUS_M, project, unproject } from "../src/geo";

const ORIGIN = { lat: 51.4974, lon: -0.1778 };

describe("project", () => {
  it("maps the origin to (0, 0)", () => {
    expect(project(ORIGIN, ORIGIN)).toEqual({ x: 0, y: 0 });
  });

  it("matches the equirectangular northward step", () => {
    // 0.01 deg of latitude = R * 0.01 * pi/180 metres, independent of origin.
    const p = project(ORIGIN, { lat: ORIGIN.lat + 0.01, lon: ORIGIN.lon });
    expect(p.y).toBeCloseTo((EARTH_RADIUS_M * 0.01 * Math.PI) / 180, 6);
    expect(p.y).toBeCloseTo(1111.949, 3);
    expect(p.x).toBeCloseTo(0, 9);
  });

  it("scales eastward steps by cos(origin latitude)", () => {
    const p = project(ORIGIN, { lat: ORIGIN.lat, lon: ORIGIN.lon + 0.01 });
    const expected =
      (EARTH_RADIUS_M * 0.01 * Math.PI / 180) * Math.cos((ORIGIN.lat * Math.PI) / 180);
    expect(p.x).toBeCloseTo(expected, 6);
    expect(p.y).toBeCloseTo(0, 9);
  });
});

describe("unproject", () => {
  it("inverts project to sub-micrometre precision", () => {
    const points = [
      { lat: 51.49, lon: -0.18 },
      { lat: 51.51, lon: -0.17 },
      { lat: 51.4974, lon: -0.1778 },
      { lat: 51.5023, lon: -0.1602 },
    ];
    for (const g of points) {
      const c = project(ORIGIN, g);
      const back = unproject(ORIGIN, c);
      expect(back.lat).toBeCloseTo(g.lat, 12);
      expect(back.lon).toBeCloseTo(g.lon, 12);
    }
  });

  it("inverts cartesian coordinates round-trip", () => {
    const c = { x: 123.456, y: -654.321 };
    const back = project(ORIGIN, unproject(ORIGIN, c));
    expect(back.x).toBeCloseTo(c.x, 6);
    expect(back.y).toBeCloseTo(c.y, 6);
  });
});
