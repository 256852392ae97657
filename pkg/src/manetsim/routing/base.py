"""Shared routing types and the router interface."""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

INFINITY = float("inf")


class Action(enum.Enum):
    DELIVER = "deliver"
    FORWARD = "forward"
    SOURCE_ROUTE = "source-route"
    DISCOVER = "discover"
    DROP = "drop"


class Lookup(NamedTuple):
    action: Action
    next_hop: Optional[int] = None
    route: Optional[tuple] = None


@dataclass
class RouteEntry:
    dest: int
    next_hop: int
    hop_count: float
    dest_seq: int
    expiry: float = INFINITY
    install_time: float = 0.0
    valid: bool = True
    seq_known: bool = True
    precursors: set = field(default_factory=set)


@dataclass
class RreqRecord:
    origin: int
    rreq_id: int
    first_seen: float
    best_hops: int


class SourceRoute(tuple):
    """Ordered node list from source to destination, loop-free."""

    def __new__(cls, hops):
        hops = tuple(hops)
        if len(set(hops)) != len(hops):
            raise ValueError(f"source route {hops} repeats a node")
        return super().__new__(cls, hops)


class SendBuffer:
    """Packets waiting for a route; overflow evicts the oldest."""

    def __init__(self, capacity=64, timeout=30.0):
        self.capacity = capacity
        self.timeout = timeout
        self.items: deque = deque()

    def __len__(self):
        return len(self.items)

    def add(self, pkt, now):
        """Buffer ``pkt``; return the evicted packet, if any."""
        evicted = None
        if len(self.items) >= self.capacity:
            evicted = self.items.popleft()[0]
        self.items.append((pkt, now))
        return evicted

    def expire(self, now):
        out = []
        while self.items and now - self.items[0][1] >= self.timeout:
            out.append(self.items.popleft()[0])
        return out

    def take(self, dest):
        out = [pkt for pkt, _ in self.items if pkt.dst == dest]
        if out:
            self.items = deque(item for item in self.items if item[0].dst != dest)
        return out

    def has(self, dest):
        return any(pkt.dst == dest for pkt, _ in self.items)

    def destinations(self):
        seen = []
        for pkt, _ in self.items:
            if pkt.dst not in seen:
                seen.append(pkt.dst)
        return seen


class Router:
    """Per-node routing state machine.

    The network calls ``originate`` for locally generated DATA, ``receive``
    for every decoded frame, and ``link_feedback`` when a unicast frame
    completes or exhausts its retries.
    """

    name = "base"
    control_first = True

    def __init__(self, node: int, net, params):
        self.node = node
        self.net = net
        self.sim = net.sim
        self.params = params

    def start(self):
        pass

    def route_lookup(self, dest: int) -> Lookup:
        raise NotImplementedError

    def originate(self, pkt):
        raise NotImplementedError

    def receive(self, pkt, prev: int):
        raise NotImplementedError

    def link_feedback(self, pkt, next_hop: int, success: bool, cause):
        pass

    # helpers --------------------------------------------------------------

    def send(self, pkt, next_hop: int):
        return self.net.send(self.node, pkt, next_hop)

    def broadcast(self, pkt, jitter=True):
        self.net.broadcast(self.node, pkt, jitter)

    def drop(self, pkt, reason: str):
        self.net.drop(pkt, reason)
