"""In-process mock of a DAG ledger with indexation-payload semantics.

Messages are content addressed: the message id is the SHA-256 digest of the
canonical serialization of (index, agent id, location, step). Canonical form
is UTF-8 JSON with lexicographically sorted keys, no whitespace, and numbers
rounded to at most 6 decimal places. The store is append only; posting is
idempotent for identical content.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

from .network import CartesianPoint, GeoPoint

HASH_ALGORITHM = "sha256"

HEALTHY = "healthy"
UNHEALTHY = "unhealthy"


class LedgerUnhealthyError(RuntimeError):
    """Posting refused because the ledger failed its health check."""


class MessageNotFoundError(KeyError):
    pass


@dataclass(frozen=True)
class CheckpointMessage:
    index: str
    agent_id: str
    lat: float
    lon: float
    x: float
    y: float
    step: int
    message_id: str

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "agent_id": self.agent_id,
            "location": {"lat": self.lat, "lon": self.lon, "x": self.x, "y": self.y},
            "step": self.step,
            "message_id": self.message_id,
        }


def canonical_payload(index: str, agent_id: str, cart: CartesianPoint,
                      geo: GeoPoint, step: int) -> bytes:
    payload = {
        "index": index,
        "agent_id": agent_id,
        "location": {
            "lat": round(geo.lat, 6),
            "lon": round(geo.lon, 6),
            "x": round(cart.x, 6),
            "y": round(cart.y, 6),
        },
        "step": step,
    }
    return json.dumps(payload, sort_keys=True, separators=(",", ":"),
                      ensure_ascii=False).encode("utf-8")


def message_id_for(index: str, agent_id: str, cart: CartesianPoint,
                   geo: GeoPoint, step: int) -> str:
    return hashlib.sha256(canonical_payload(index, agent_id, cart, geo, step)).hexdigest()


class MockTangle:
    """Append-only message store queryable by message id and index tag."""

    def __init__(self):
        self._messages: dict[str, CheckpointMessage] = {}
        self._index_map: dict[str, list[str]] = {}
        self._order: list[str] = []
        self._fault = False
        # stands in for the remote session setup (seed/address generation)
        self.session_id = "mock-tangle-session"

    def set_fault(self, fault: bool) -> None:
        """Fault-injection hook: an unhealthy ledger refuses posts."""
        self._fault = fault

    def __len__(self):
        return len(self._messages)


def health_check(ledger: MockTangle) -> str:
    return UNHEALTHY if ledger._fault else HEALTHY


def post_checkpoint(ledger: MockTangle, index: str, agent_id: str,
                    cart: CartesianPoint, geo: GeoPoint, step: int) -> str:
    """Store a checkpoint message; returns its content-hash message id."""
    if health_check(ledger) != HEALTHY:
        raise LedgerUnhealthyError("ledger is unhealthy, post refused")
    message_id = message_id_for(index, agent_id, cart, geo, step)
    if message_id not in ledger._messages:
        msg = CheckpointMessage(
            index=index, agent_id=agent_id,
            lat=round(geo.lat, 6), lon=round(geo.lon, 6),
            x=round(cart.x, 6), y=round(cart.y, 6),
            step=step, message_id=message_id)
        ledger._messages[message_id] = msg
        ledger._index_map.setdefault(index, []).append(message_id)
        ledger._order.append(message_id)
    return message_id


def fetch_by_id(ledger: MockTangle, message_id: str) -> CheckpointMessage:
    try:
        return ledger._messages[message_id]
    except KeyError:
        raise MessageNotFoundError(message_id) from None


def query_by_index(ledger: MockTangle, index: str) -> list[CheckpointMessage]:
    """All messages posted under an index tag, in insertion order."""
    return [ledger._messages[mid] for mid in ledger._index_map.get(index, [])]


def dump_messages(ledger: MockTangle) -> list[dict]:
    """All messages in global insertion order, as JSON-ready dicts."""
    return [ledger._messages[mid].to_dict() for mid in ledger._order]


def dump_json(ledger: MockTangle) -> str:
    return json.dumps(dump_messages(ledger), indent=2, sort_keys=True)
