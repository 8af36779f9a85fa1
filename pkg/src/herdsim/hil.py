"""Human-in-the-loop server: admits live participants into a running sim.

Transports: line-delimited JSON over a plain TCP socket, and the same
payloads framed over WebSocket for the browser client. All inbound messages
funnel through a single inbox that the tick loop drains once per step
boundary, so session handlers never touch simulation state directly.

Wire protocol (one JSON object per line/frame):
  client -> server: {"type":"join","name":...} {"type":"position","lat":..,
  "lon":..,"ts":..} {"type":"decision","accept":bool,"epoch_step":int}
  {"type":"leave"}
  server -> client: joined, price, route, checkpoint, error
"""
from __future__ import annotations

import json
import logging
import queue
import socket
import socketserver
import threading
import time

from .agents import Agent
from .engine import ExpiredDecisionError, OffMapError, Simulation
from .network import GeoPoint, NetworkError

logger = logging.getLogger(__name__)


class Session:
    """One connected participant, transport agnostic."""

    def __init__(self, session_id: str, send):
        self.session_id = session_id
        self._send = send
        self.agent: Agent | None = None
        self.pending_epoch: int | None = None
        self.closed = False
        self._lock = threading.Lock()

    def send(self, payload: dict) -> None:
        if self.closed:
            return
        try:
            with self._lock:
                self._send(payload)
        except OSError:
            self.closed = True

    def error(self, reason: str) -> None:
        self.send({"type": "error", "reason": reason})


class HilServer:
    """Ticks a simulation at wall-clock rate and brokers participant I/O."""

    def __init__(self, sim: Simulation, tick_seconds: float = 1.0):
        self.sim = sim
        self.tick_seconds = tick_seconds
        self.inbox: queue.Queue = queue.Queue()
        self.sessions: list[Session] = []
        self._sessions_lock = threading.Lock()
        self._session_counter = 0
        self._stop = threading.Event()
        self._servers = []
        self._threads = []

    # -- session management ----------------------------------------------

    def register(self, send) -> Session:
        with self._sessions_lock:
            session = Session(f"s{self._session_counter}", send)
            self._session_counter += 1
            self.sessions.append(session)
        return session

    def unregister(self, session: Session) -> None:
        session.closed = True
        self.inbox.put((session, {"type": "leave"}))

    def submit(self, session: Session, raw: str) -> None:
        """Parse one wire line; protocol errors answer without closing."""
        try:
            msg = json.loads(raw)
        except json.JSONDecodeError:
            session.error("parse")
            return
        if not isinstance(msg, dict) or not isinstance(msg.get("type"), str):
            session.error("parse")
            return
        self.inbox.put((session, msg))

    # -- engine-side processing (tick thread only) -------------------------

    def _handle(self, session: Session, msg: dict) -> None:
        kind = msg["type"]
        sim = self.sim
        if kind == "join":
            if session.agent is not None:
                session.error("already-joined")
                return
            session.agent = sim.add_external()
            session.send({"type": "joined", "agent_id": session.agent.agent_id,
                          "price": sim.price, "step": sim.step_count})
        elif kind == "leave":
            if session.agent is not None:
                sim.remove_external(session.agent)
                session.agent = None
        elif session.agent is None:
            session.error("not-joined")
        elif kind == "position":
            try:
                geo = GeoPoint(float(msg["lat"]), float(msg["lon"]))
            except (KeyError, TypeError, ValueError, NetworkError):
                session.error("parse")
                return
            try:
                posted = sim.place_external(session.agent, geo)
            except OffMapError:
                session.error("off-map")
                return
            for mid in posted:
                session.send({"type": "checkpoint", "message_id": mid,
                              "step": sim.step_count})
        elif kind == "decision":
            epoch = msg.get("epoch_step")
            if session.pending_epoch is None:
                session.error("no-pending-decision")
                return
            if epoch != session.pending_epoch:
                session.error("expired")
                return
            try:
                ir = sim.apply_external_decision(
                    session.agent, bool(msg.get("accept")), epoch)
            except ExpiredDecisionError:
                session.error("expired")
                return
            session.pending_epoch = None
            if ir is not None:
                waypoints = [{"lat": g.lat, "lon": g.lon}
                             for g in sim.waypoint_geopoints(ir)]
                session.send({"type": "route", "route_id": ir.route_id,
                              "waypoints": waypoints})
        else:
            session.error("unknown-type")

    def tick(self) -> None:
        """Drain the inbox, advance one step, broadcast epoch prices."""
        while True:
            try:
                session, msg = self.inbox.get_nowait()
            except queue.Empty:
                break
            self._handle(session, msg)
        if self.sim.step_count < self.sim.config.n_steps:
            self.sim.step()
            if self.sim.last_step_repriced:
                payload = {"type": "price", "value": self.sim.price,
                           "epoch_step": self.sim.epoch_step}
                with self._sessions_lock:
                    live = [s for s in self.sessions if not s.closed]
                for session in live:
                    if session.agent is not None:
                        session.pending_epoch = self.sim.epoch_step
                        session.send(payload)

    def _tick_loop(self) -> None:
        while not self._stop.is_set():
            started = time.monotonic()
            self.tick()
            delay = self.tick_seconds - (time.monotonic() - started)
            if delay > 0:
                self._stop.wait(delay)

    # -- transports --------------------------------------------------------

    def start_tcp(self, host: str, port: int) -> int:
        server = _TcpServer((host, port), _TcpHandler, self)
        self._servers.append(server)
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        self._threads.append(thread)
        return server.server_address[1]

    def start_websocket(self, host: str, port: int) -> int:
        from websockets.sync.server import serve as ws_serve

        hil = self

        def handler(ws):
            session = hil.register(lambda payload: ws.send(json.dumps(payload)))
            try:
                for raw in ws:
                    hil.submit(session, raw)
            except Exception:
                pass
            finally:
                hil.unregister(session)

        server = ws_serve(handler, host, port)
        self._servers.append(server)
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        self._threads.append(thread)
        return port

    def start_http(self, host: str, port: int, static_dir=None,
                   ws_port: int | None = None) -> int:
        """Static endpoint: web client assets plus the network JSON."""
        import functools
        from http.server import SimpleHTTPRequestHandler, ThreadingHTTPServer

        net_json = json.dumps(self.sim.net.to_dict()).encode()
        cfg_json = json.dumps({"ws_port": ws_port}).encode()

        class Handler(SimpleHTTPRequestHandler):
            def do_GET(self):
                if self.path == "/network.json":
                    self._blob(net_json)
                elif self.path == "/server.json":
                    self._blob(cfg_json)
                else:
                    super().do_GET()

            def _blob(self, blob):
                self.send_response(200)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(blob)))
                self.end_headers()
                self.wfile.write(blob)

            def log_message(self, *args):
                logger.debug("http: %s", args)

        handler = functools.partial(Handler, directory=str(static_dir or "."))
        server = ThreadingHTTPServer((host, port), handler)
        self._servers.append(server)
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        self._threads.append(thread)
        return server.server_address[1]

    def start_ticking(self) -> None:
        thread = threading.Thread(target=self._tick_loop, daemon=True)
        thread.start()
        self._threads.append(thread)

    def stop(self) -> None:
        self._stop.set()
        for server in self._servers:
            try:
                server.shutdown()
            except Exception:
                pass


class _TcpServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, addr, handler, hil: HilServer):
        self.hil = hil
        super().__init__(addr, handler)


class _TcpHandler(socketserver.StreamRequestHandler):
    def handle(self):
        hil: HilServer = self.server.hil
        wfile = self.wfile

        def send(payload):
            wfile.write((json.dumps(payload) + "\n").encode("utf-8"))
            wfile.flush()

        session = hil.register(send)
        try:
            for raw in self.rfile:
                line = raw.decode("utf-8", errors="replace").strip()
                if line:
                    hil.submit(session, line)
        except (ConnectionError, socket.timeout):
            pass
        finally:
            hil.unregister(session)


def serve(sim: Simulation, host: str, port: int, http_port: int | None = None,
          ws_port: int | None = None, static_dir=None,
          tick_seconds: float = 1.0) -> HilServer:
    """Start all transports and the tick loop; returns the running server."""
    server = HilServer(sim, tick_seconds=tick_seconds)
    server.start_tcp(host, port)
    if ws_port is not None:
        server.start_websocket(host, ws_port)
    if http_port is not None:
        server.start_http(host, http_port, static_dir=static_dir, ws_port=ws_port)
    server.start_ticking()
    return server
