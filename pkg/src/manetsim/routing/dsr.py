"""Dynamic Source Routing."""

from __future__ import annotations

from ..packet import IP_HEADER, Kind, Packet, source_route_size
from .base import Action, Lookup, Router, RreqRecord, SendBuffer, SourceRoute


def rreq_bytes(route):
    return IP_HEADER + 8 + 4 * len(route)


def rrep_bytes(route):
    return IP_HEADER + 8 + 4 * len(route)


RERR_BYTES = IP_HEADER + 16


def has_link(path, a, b) -> bool:
    for u, v in zip(path, path[1:]):
        if (u == a and v == b) or (u == b and v == a):
            return True
    return False


class Dsr(Router):
    """DSR with a path cache, replies from cache and RERR-driven purging.

    Cached paths never expire on their own; they leave the cache only when
    a RERR or a local link failure names one of their links, or when the
    cache overflows (oldest first). Every decoded frame also caches the
    one-hop path back to its transmitter.
    """

    name = "dsr"
    control_first = True

    def __init__(self, node, net, params):
        super().__init__(node, net, params)
        self.cache: list[tuple] = []
        self.rreq_id = 0
        self.seen: dict[tuple, RreqRecord] = {}
        self.buffer = SendBuffer(params.send_buffer_size, params.send_buffer_timeout)
        self.pending: dict = {}
        self.malformed = 0

    # cache -----------------------------------------------------------------

    def cache_add(self, path):
        path = tuple(path)
        if len(path) < 2 or path[0] != self.node or len(set(path)) != len(path):
            return
        if path in self.cache:
            self.cache.remove(path)
        self.cache.append(path)
        if len(self.cache) > self.params.dsr_cache_size:
            del self.cache[0]
        self._flush()

    def best_route(self, dest):
        best = None
        for path in reversed(self.cache):
            if dest in path:
                cand = path[:path.index(dest) + 1]
                if best is None or len(cand) < len(best):
                    best = cand
        return best

    def purge_link(self, a, b):
        self.cache = [p for p in self.cache if not has_link(p, a, b)]

    # data path -------------------------------------------------------------

    def route_lookup(self, dest) -> Lookup:
        if dest == self.node:
            return Lookup(Action.DELIVER)
        route = self.best_route(dest)
        if route is not None:
            return Lookup(Action.SOURCE_ROUTE, route[1], SourceRoute(route))
        return Lookup(Action.DISCOVER)

    def originate(self, pkt):
        if pkt.dst == self.node:
            self.net.deliver_local(self.node, pkt)
            return
        self._send_from_source(pkt)

    def _send_from_source(self, pkt):
        look = self.route_lookup(pkt.dst)
        if look.action is Action.SOURCE_ROUTE:
            self._stamp(pkt, look.route)
            self.send(pkt, look.next_hop)
        else:
            now = self.sim.now
            for old in self.buffer.expire(now):
                self.drop(old, "buffer_timeout")
            evicted = self.buffer.add(pkt, now)
            if evicted is not None:
                self.drop(evicted, "buffer_overflow")
            self._discover(pkt.dst)

    @staticmethod
    def _stamp(pkt, route):
        if pkt.route is not None:
            pkt.size -= source_route_size(pkt.route)
        pkt.route = route
        pkt.size += source_route_size(route)

    def _flush(self):
        if not len(self.buffer):
            return
        for dest in self.buffer.destinations():
            if self.best_route(dest) is not None:
                if dest in self.pending:
                    self.pending.pop(dest).cancel()
                for pkt in self.buffer.take(dest):
                    self._send_from_source(pkt)

    # discovery -------------------------------------------------------------

    def _discover(self, dest):
        if dest not in self.pending:
            self._send_rreq(dest, self.params.dsr_request_period)

    def _send_rreq(self, dest, period):
        self.rreq_id += 1
        route = (self.node,)
        pkt = Packet(Kind.RREQ, self.node, dest, rreq_bytes(route), self.sim.now,
                     origin=self.node, target=dest, rreq_id=self.rreq_id, route=route)
        pkt.ttl = self.params.net_diameter
        self.seen[(self.node, self.rreq_id)] = RreqRecord(self.node, self.rreq_id,
                                                         self.sim.now, 1)
        self.broadcast(pkt, jitter=False)
        self.pending[dest] = self.sim.after(period, self._rreq_timeout, dest, period)

    def _rreq_timeout(self, dest, period):
        self.pending.pop(dest, None)
        if not self.net.alive(self.node):
            return
        for old in self.buffer.expire(self.sim.now):
            self.drop(old, "buffer_timeout")
        if not self.buffer.has(dest):
            return
        if self.best_route(dest) is not None:
            self._flush()
            return
        self._send_rreq(dest, min(2 * period, self.params.dsr_max_request_period))

    # receive ---------------------------------------------------------------

    def receive(self, pkt, prev):
        # hearing prev proves the link; links are taken as symmetric
        self.cache_add((self.node, prev))
        kind = pkt.kind
        if kind is Kind.DATA:
            self._on_data(pkt, prev)
        elif kind is Kind.RREQ:
            self._on_rreq(pkt, prev)
        elif kind is Kind.RREP:
            self._on_rrep(pkt, prev)
        elif kind is Kind.RERR:
            self._on_rerr(pkt, prev)

    def _on_rreq(self, pkt, prev):
        me = self.node
        if pkt.origin == me or me in pkt.route:
            return
        full = pkt.route + (me,)
        key = (pkt.origin, pkt.rreq_id)
        rec = self.seen.get(key)
        if rec is not None and len(full) >= rec.best_hops:
            return
        if rec is None:
            self.seen[key] = RreqRecord(pkt.origin, pkt.rreq_id, self.sim.now, len(full))
        else:
            rec.best_hops = len(full)
        self.cache_add(reversed(full))
        if pkt.target == me:
            self._send_rrep(full)
            return
        if self.params.dsr_reply_from_cache:
            path = self.best_route(pkt.target)
            if path is not None and not set(path[1:]) & set(full):
                self._send_rrep(full + path[1:])
                return
        if pkt.ttl <= 1:
            return
        fwd = Packet(Kind.RREQ, pkt.src, pkt.dst, rreq_bytes(full), pkt.created,
                     origin=pkt.origin, target=pkt.target, rreq_id=pkt.rreq_id, route=full)
        fwd.ttl = pkt.ttl - 1
        self.broadcast(fwd)

    def _send_rrep(self, route):
        route = SourceRoute(route)
        i = route.index(self.node)
        rrep = Packet(Kind.RREP, self.node, route[0], rrep_bytes(route), self.sim.now,
                      target=route[-1], route=route)
        self.send(rrep, route[i - 1])

    def _position(self, pkt):
        try:
            return pkt.route.index(self.node)
        except (AttributeError, ValueError):
            self.malformed += 1
            return None

    def _on_rrep(self, pkt, prev):
        i = self._position(pkt)
        if i is None:
            return
        route = pkt.route
        self.cache_add(route[i:])
        if i > 0:
            self.cache_add(reversed(route[:i + 1]))
            self.send(pkt, route[i - 1])

    def _on_data(self, pkt, prev):
        pkt.hops += 1
        i = self._position(pkt)
        if i is None:
            self.drop(pkt, "malformed")
            return
        route = pkt.route
        if i == len(route) - 1:
            self.net.deliver_local(self.node, pkt)
            return
        pkt.ttl -= 1
        if pkt.ttl <= 0:
            self.drop(pkt, "ttl")
            return
        if self.params.dsr_gratuitous_reply:
            shorter = self.best_route(pkt.dst)
            if shorter is not None and len(shorter) < len(route) - i:
                head = route[:i]
                if not set(head) & set(shorter):
                    self._send_rrep_back(head + shorter, i)
        self.send(pkt, route[i + 1])

    def _send_rrep_back(self, route, i):
        route = SourceRoute(route)
        rrep = Packet(Kind.RREP, self.node, route[0], rrep_bytes(route), self.sim.now,
                      target=route[-1], route=route)
        self.send(rrep, route[i - 1])

    def _on_rerr(self, pkt, prev):
        i = self._position(pkt)
        if i is None:
            return
        self.purge_link(*pkt.link)
        if i < len(pkt.route) - 1:
            self.send(pkt, pkt.route[i + 1])

    # maintenance -----------------------------------------------------------

    def link_feedback(self, pkt, next_hop, success, cause):
        if success:
            return
        self.purge_link(self.node, next_hop)
        notified = set()
        self._salvage(pkt, next_hop, cause, notified)
        for queued in self.net.purge(self.node, next_hop):
            self._salvage(queued, next_hop, "no_route", notified)

    def _salvage(self, pkt, next_hop, cause, notified):
        if pkt.kind is not Kind.DATA:
            return
        if pkt.src == self.node:
            self._send_from_source(pkt)
            return
        self.drop(pkt, cause)
        if pkt.src in notified or pkt.route is None or self.node not in pkt.route:
            return
        notified.add(pkt.src)
        i = pkt.route.index(self.node)
        back = tuple(reversed(pkt.route[:i + 1]))
        if len(back) < 2:
            return
        rerr = Packet(Kind.RERR, self.node, pkt.src, RERR_BYTES, self.sim.now,
                      route=back, link=(self.node, next_hop))
        self.send(rerr, back[1])
