"""Discrete-event message fabric: scheduler, links and the event log.

Each node is a single logical actor draining its inbox serially; all
cross-node traffic travels as encoded envelopes over configured links.
Simulated mode owns a virtual clock and is fully deterministic; realtime
mode replays the same schedule against the wall clock for demos.
"""

from __future__ import annotations

import base64
import heapq
import json
import time
from dataclasses import dataclass
from typing import Callable

from ..errors import ScenarioError
from . import codec
from .codec import Envelope, MsgType


@dataclass
class LinkConfig:
    latency_ms: int = 0
    capacity: int | None = None

    def __post_init__(self):
        if self.latency_ms < 0:
            raise ScenarioError(f"latency must be >= 0, got {self.latency_ms}")
        if self.capacity is not None and self.capacity < 1:
            raise ScenarioError(f"capacity must be >= 1, got {self.capacity}")


@dataclass
class _InFlight:
    env: Envelope
    cancelled: bool = False


class Link:
    """Directed point-to-point link with FIFO delivery and oldest-drop."""

    def __init__(self, src: str, dst: str, config: LinkConfig):
        self.src = src
        self.dst = dst
        self.config = config
        self._in_flight: list[_InFlight] = []

    @property
    def name(self) -> str:
        return f"{self.src}->{self.dst}"

    def admit(self, env: Envelope) -> tuple[_InFlight, _InFlight | None]:
        """Queue an envelope; returns (entry, dropped_oldest_or_None)."""
        dropped = None
        self._in_flight = [e for e in self._in_flight if not e.cancelled]
        if self.config.capacity is not None and len(self._in_flight) >= self.config.capacity:
            dropped = self._in_flight.pop(0)
            dropped.cancelled = True
        entry = _InFlight(env)
        self._in_flight.append(entry)
        return entry, dropped

    def release(self, entry: _InFlight) -> None:
        if entry in self._in_flight:
            self._in_flight.remove(entry)


class Node:
    """Base actor; subclasses implement handle()."""

    kind = "Node"

    def __init__(self, name: str):
        self.name = name
        self.fabric: "Fabric | None" = None

    def start(self) -> None:
        """Called once before the clock starts; schedule initial work here."""

    def handle(self, env: Envelope) -> None:
        raise NotImplementedError

    # conveniences forwarded to the fabric
    @property
    def now(self) -> int:
        return self.fabric.now

    def send(self, dst: str, msg_type: MsgType, payload: dict) -> None:
        self.fabric.send(self.name, dst, msg_type, payload)

    def at(self, t_ms: int, fn: Callable[[], None]) -> None:
        self.fabric.schedule(t_ms, fn)


class Fabric:
    """Owner of the clock, the links and the totally ordered event log."""

    def __init__(self, driver_id: str, mode: str = "simulated", realtime_scale: float = 1.0):
        if mode not in ("simulated", "realtime"):
            raise ScenarioError(f"unknown mode {mode!r}")
        self.driver_id = driver_id
        self.mode = mode
        self.realtime_scale = realtime_scale
        self.now = 0
        self.nodes: dict[str, Node] = {}
        self.links: dict[tuple[str, str], Link] = {}
        self.events: list[dict] = []
        self._heap: list[tuple[int, int, Callable[[], None]]] = []
        self._heap_seq = 0
        self._seqs: dict[tuple[str, str], int] = {}
        self._down: set[str] = set()

    def add_node(self, node: Node) -> Node:
        if node.name in self.nodes:
            raise ScenarioError(f"duplicate node {node.name!r}")
        node.fabric = self
        self.nodes[node.name] = node
        return node

    def add_link(self, src: str, dst: str, config: LinkConfig | None = None) -> Link:
        link = Link(src, dst, config or LinkConfig())
        self.links[(src, dst)] = link
        return link

    def schedule(self, t_ms: int, fn: Callable[[], None]) -> None:
        if t_ms < self.now:
            raise ScenarioError(f"cannot schedule at {t_ms} before now={self.now}")
        heapq.heappush(self._heap, (t_ms, self._heap_seq, fn))
        self._heap_seq += 1

    def fail_node(self, name: str) -> None:
        self._down.add(name)
        self._log({"event": "node_down", "t_ms": self.now, "node": name})

    def next_seq(self, sender: str, msg_type: MsgType) -> int:
        key = (sender, msg_type.value)
        self._seqs[key] = self._seqs.get(key, 0) + 1
        return self._seqs[key]

    def send(self, src: str, dst: str, msg_type: MsgType, payload: dict) -> None:
        link = self.links.get((src, dst))
        if link is None:
            raise ScenarioError(f"no link {src}->{dst}")
        env = Envelope(
            msg_type=msg_type,
            driver_id=self.driver_id,
            seq=self.next_seq(src, msg_type),
            sent_at=self.now,
            payload=payload,
        )
        self.deliver(link, env)

    def deliver(self, link: Link, env: Envelope) -> None:
        """Schedule arrival at sent_at + latency, honoring link capacity."""
        entry, dropped = link.admit(env)
        if dropped is not None:
            self._log_envelope("drop", self.now, link, dropped.env, reason="capacity")
        arrival = env.sent_at + link.config.latency_ms

        def _arrive():
            if entry.cancelled:
                return
            link.release(entry)
            if link.dst in self._down:
                self._log_envelope("drop", arrival, link, env, reason="node_down")
                return
            self._log_envelope("deliver", arrival, link, env)
            self.nodes[link.dst].handle(env)

        self.schedule(arrival, _arrive)

    def run(self, until_ms: int | None = None) -> None:
        """Drain the schedule (or stop after until_ms of virtual time)."""
        for node in self.nodes.values():
            node.start()
        wall_start = time.monotonic()
        while self._heap:
            if until_ms is not None and self._heap[0][0] > until_ms:
                break
            t, _, fn = heapq.heappop(self._heap)
            if self.mode == "realtime":
                lag = (t / 1000.0) / self.realtime_scale - (time.monotonic() - wall_start)
                if lag > 0:
                    time.sleep(lag)
            self.now = t
            fn()
        if until_ms is not None:
            self.now = max(self.now, until_ms)

    def _log(self, record: dict) -> None:
        self.events.append(record)

    def _log_envelope(self, event: str, t_ms: int, link: Link, env: Envelope,
                      reason: str | None = None) -> None:
        record = {
            "event": event,
            "t_ms": t_ms,
            "from": link.src,
            "to": link.dst,
            "msg_type": env.msg_type.value,
            "seq": env.seq,
            "payload_digest": env.payload_digest(),
            "frame": base64.b64encode(codec.encode(env)).decode("ascii"),
        }
        if reason is not None:
            record["reason"] = reason
        self._log(record)


def events_to_jsonl(events: list[dict]) -> str:
    return "".join(json.dumps(e, sort_keys=True, separators=(",", ":")) + "\n" for e in events)


def envelopes_from_events(events: list[dict], event_kind: str = "deliver") -> list[Envelope]:
    """Re-decode the frames captured in the event log."""
    out = []
    for record in events:
        if record.get("event") == event_kind and "frame" in record:
            out.append(codec.decode(base64.b64decode(record["frame"])))
    return out
