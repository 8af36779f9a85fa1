/** Browser entry point: fetches the network, opens the WebSocket, and wires
 * the session store to the DOM. Position comes from the Geolocation API when
 * available, otherwise from clicking the map (click-to-walk). */
import { parseServerMessage } from "./protocol";
import type { RoadNetwork } from "./network";
import { snapToNetwork } from "./network";
import { SessionStore } from "./session";
import { unproject } from "./geo";
import { makeView, drawMap } from "./map";

function $(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (el === null) throw new Error(`missing element #${id}`);
  return el;
}

async function start(): Promise<void> {
  const [serverInfo, net] = await Promise.all([
    fetch("/server.json").then((r) => r.json() as Promise<{ ws_port: number }>),
    fetch("/network.json").then((r) => r.json() as Promise<RoadNetwork>),
  ]);

  const canvas = $("map") as HTMLCanvasElement;
  const ctx = canvas.getContext("2d");
  if (ctx === null) throw new Error("canvas unsupported");
  const view = makeView(net, canvas.width, canvas.height);

  const ws = new WebSocket(`ws://${location.hostname}:${serverInfo.ws_port}/`);
  const store = new SessionStore((frame) => ws.send(frame));
  ws.onmessage = (ev) => {
    const msg = parseServerMessage(String(ev.data));
    if (msg !== null) store.handleMessage(msg);
  };
  ws.onclose = () => {
    $("status").textContent = "disconnected";
  };

  let walker: { x: number; y: number } | null = null;
  let lastGeo: { lat: number; lon: number } | null = null;

  function render(): void {
    const s = store.state;
    $("status").textContent = s.status === "joined" ? `joined as ${s.agentId}` : s.status;
    $("price").textContent = s.price === null ? "–" : s.price.toFixed(2);
    $("error").textContent = s.lastError ?? "";
    $("checkpoints").textContent = String(s.checkpoints.length);
    const accept = $("accept") as HTMLButtonElement;
    const decline = $("decline") as HTMLButtonElement;
    accept.disabled = decline.disabled = !store.canDecide();
    ($("join") as HTMLButtonElement).disabled = s.status !== "idle";
    ($("leave") as HTMLButtonElement).disabled = s.status === "idle";
    drawMap(ctx!, net, view, {
      route: s.route?.waypoints ?? null,
      waypointsPassed: store.waypointsPassed(),
      walker,
    });
  }
  store.onChange(render);

  ($("join") as HTMLButtonElement).onclick = () => {
    const name = (($("name") as HTMLInputElement).value || "walker").trim();
    store.join(name);
  };
  ($("leave") as HTMLButtonElement).onclick = () => store.leave();
  ($("accept") as HTMLButtonElement).onclick = () => store.decide(true);
  ($("decline") as HTMLButtonElement).onclick = () => store.decide(false);

  // Click-to-walk: snap the click to the nearest pedestrian edge and report
  // that position; doubles as the manual fallback when geolocation is absent.
  canvas.onclick = (ev) => {
    const rect = canvas.getBoundingClientRect();
    const cx = ((ev.clientX - rect.left) / rect.width) * canvas.width;
    const cy = ((ev.clientY - rect.top) / rect.height) * canvas.height;
    const [wx, wy] = view.toWorld(cx, cy);
    const snapped = snapToNetwork(net, wx, wy);
    if (snapped === null) return;
    walker = { x: snapped.x, y: snapped.y };
    lastGeo = unproject(net.geo_origin, { x: snapped.x, y: snapped.y });
    render();
  };

  const useGeo = ($("use-geolocation") as HTMLInputElement);
  if (!("geolocation" in navigator)) {
    useGeo.checked = false;
    useGeo.disabled = true;
  }
  if (useGeo.checked) {
    navigator.geolocation.watchPosition(
      (pos) => {
        lastGeo = { lat: pos.coords.latitude, lon: pos.coords.longitude };
      },
      () => {
        useGeo.checked = false;
      },
    );
  }

  // Report the latest known position once per second while joined.
  setInterval(() => {
    if (lastGeo !== null && store.state.status === "joined") {
      store.reportPosition(lastGeo.lat, lastGeo.lon, Date.now() / 1000);
    }
  }, 1000);

  render();
}

start().catch((err) => {
  document.body.textContent = `failed to start: ${err}`;
});
