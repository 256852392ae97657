"""Constant-bit-rate sources and sinks over a UDP-like transport."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .packet import Kind, Packet, data_size


class TrafficError(ValueError):
    pass


@dataclass(frozen=True)
class Connection:
    cid: int
    src: int
    dst: int
    start: float
    stop: float
    rate_pps: float = 8.0
    payload_bytes: int = 512

    def __post_init__(self):
        if self.src == self.dst:
            raise TrafficError("connection endpoints must differ")
        if self.rate_pps <= 0:
            raise TrafficError("rate must be positive")
        if not self.start < self.stop:
            raise TrafficError("start must precede stop")

    @property
    def interval(self) -> float:
        return 1.0 / self.rate_pps

    def emission_time(self, k: int) -> float:
        return self.start + k / self.rate_pps

    def expected_count(self) -> int:
        return math.ceil((self.stop - self.start) * self.rate_pps)


def build_connections(n, nodes, rng, horizon, rate_pps=8.0, payload_bytes=512,
                      start_window=10.0):
    """Draw ``n`` distinct ordered (src, dst) pairs with staggered starts.

    Pairs and start times are drawn one connection at a time, so the set for
    ``n`` connections is a prefix of the set for any larger ``n`` under the
    same stream.
    """
    if n > nodes * (nodes - 1):
        raise TrafficError(f"{n} connections need more than {nodes} nodes")
    if start_window >= horizon:
        raise TrafficError("start window must end before the horizon")
    seen = set()
    out = []
    while len(out) < n:
        src = rng.integer(nodes)
        dst = rng.integer(nodes - 1)
        if dst >= src:
            dst += 1
        if (src, dst) in seen:
            continue
        seen.add((src, dst))
        start = rng.uniform(None, 0.0, start_window)
        out.append(Connection(len(out), src, dst, start, horizon, rate_pps, payload_bytes))
    return out


def cbr_tick(conn: Connection, k: int, now: float) -> Packet:
    """The ``k``-th DATA packet of ``conn``, emitted at ``now``."""
    pkt = Packet(Kind.DATA, conn.src, conn.dst, data_size(conn.payload_bytes), created=now)
    pkt.conn = conn.cid
    pkt.seq = k
    return pkt


class CbrSource:
    """Schedules the packets of one connection on the simulator."""

    def __init__(self, conn: Connection, sim, emit):
        self.conn = conn
        self.sim = sim
        self.emit = emit
        self.k = 0

    def start(self):
        self.sim.schedule(self.conn.start, self._tick)

    def _tick(self):
        conn = self.conn
        self.emit(cbr_tick(conn, self.k, self.sim.now))
        self.k += 1
        if self.k < conn.expected_count():
            self.sim.schedule(conn.emission_time(self.k), self._tick)


class Sink:
    """Receives the packets of one connection and feeds the ledger."""

    def __init__(self, conn: Connection, ledger):
        self.conn = conn
        self.ledger = ledger
        self.seen = set()

    def sink_receive(self, pkt: Packet, now: float) -> bool:
        """Return True when ``pkt`` is a first arrival for this connection."""
        if pkt.conn != self.conn.cid or pkt.dst != self.conn.dst:
            return False
        if pkt.seq in self.seen:
            self.ledger.duplicates += 1
            return False
        self.seen.add(pkt.seq)
        ledger = self.ledger
        ledger.cbr_received += 1
        ledger.delay_sum_s += now - pkt.created
        ledger.received_bits += self.conn.payload_bytes * 8
        ledger.hop_sum += pkt.hops
        return True
