"""Ad hoc On-demand Distance Vector routing."""

from __future__ import annotations

from ..packet import BROADCAST, IP_HEADER, Kind, Packet
from .base import Action, Lookup, RouteEntry, Router, RreqRecord, SendBuffer

RREQ_BYTES = 24 + IP_HEADER
RREP_BYTES = 20 + IP_HEADER


def rerr_bytes(n):
    return 4 + 8 * n + IP_HEADER


class Aodv(Router):
    """AODV with hellos, destination sequence numbers and RERR propagation.

    A repeated RREQ is re-processed only when it arrives over strictly fewer
    hops than every earlier copy, so reverse routes and replies settle on
    shortest paths whatever order the copies arrive in.
    """

    name = "aodv"
    control_first = True

    def __init__(self, node, net, params):
        super().__init__(node, net, params)
        self.seq = 0
        self.rreq_id = 0
        self.table: dict[int, RouteEntry] = {}
        self.seen: dict[tuple, RreqRecord] = {}
        self.buffer = SendBuffer(params.send_buffer_size, params.send_buffer_timeout)
        self.pending: dict = {}
        self.last_heard: dict[int, float] = {}
        self.stale_rreps = 0
        self.orphan_rreps = 0

    def start(self):
        p = self.params
        if p.hello_interval > 0:
            self.sim.schedule(self.net.routing_rng.uniform(None, 0.0, p.hello_interval),
                              self._hello)

    # table helpers ---------------------------------------------------------

    def _valid(self, dest):
        e = self.table.get(dest)
        if e is None or not e.valid:
            return None
        if e.expiry <= self.sim.now:
            e.valid = False
            return None
        return e

    def _update_route(self, dest, next_hop, hops, seq, lifetime) -> bool:
        """Install or improve a route; False leaves the table unchanged."""
        now = self.sim.now
        e = self.table.get(dest)
        if e is None:
            self.table[dest] = RouteEntry(dest, next_hop, hops, seq, now + lifetime, now)
            self._route_ready(dest)
            return True
        if e.seq_known and seq < e.dest_seq:
            return False
        live = e.valid and e.expiry > now
        if (not live or not e.seq_known or seq > e.dest_seq
                or (seq == e.dest_seq and hops < e.hop_count)):
            e.next_hop = next_hop
            e.hop_count = hops
            e.dest_seq = seq
            e.seq_known = True
            e.expiry = max(e.expiry if live else now, now + lifetime)
            e.install_time = now
            e.valid = True
            self._route_ready(dest)
            return True
        if next_hop == e.next_hop and hops == e.hop_count:
            e.expiry = max(e.expiry, now + lifetime)
        return False

    def _touch_neighbor(self, nbr):
        now = self.sim.now
        self.last_heard[nbr] = now
        lifetime = self.params.active_route_timeout
        e = self.table.get(nbr)
        if e is None:
            self.table[nbr] = RouteEntry(nbr, nbr, 1, 0, now + lifetime, now, seq_known=False)
            self._route_ready(nbr)
            return
        if not e.valid or e.expiry <= now or e.hop_count > 1:
            e.next_hop = nbr
            e.hop_count = 1
            e.valid = True
            e.install_time = now
            e.expiry = now + lifetime
            self._route_ready(nbr)
        else:
            e.expiry = max(e.expiry, now + lifetime)

    def _route_ready(self, dest):
        if dest in self.pending:
            self.pending.pop(dest).cancel()
        if self.buffer.has(dest):
            for pkt in self.buffer.take(dest):
                self._forward(pkt)

    # data path -------------------------------------------------------------

    def route_lookup(self, dest) -> Lookup:
        if dest == self.node:
            return Lookup(Action.DELIVER)
        e = self._valid(dest)
        if e is not None:
            return Lookup(Action.FORWARD, e.next_hop)
        return Lookup(Action.DISCOVER)

    def originate(self, pkt):
        if pkt.dst == self.node:
            self.net.deliver_local(self.node, pkt)
            return
        self._forward(pkt)

    def _forward(self, pkt, prev=None):
        e = self._valid(pkt.dst)
        if e is None:
            if pkt.src == self.node:
                self._buffer(pkt)
                self._discover(pkt.dst)
            else:
                self.drop(pkt, "no_route")
                self._send_rerr([(pkt.dst, self._bumped_seq(pkt.dst))])
            return
        now = self.sim.now
        e.expiry = max(e.expiry, now + self.params.active_route_timeout)
        if prev is not None:
            e.precursors.add(prev)
        self.send(pkt, e.next_hop)

    def _bumped_seq(self, dest):
        e = self.table.get(dest)
        return e.dest_seq if e is not None else 0

    def _buffer(self, pkt):
        now = self.sim.now
        for old in self.buffer.expire(now):
            self.drop(old, "buffer_timeout")
        evicted = self.buffer.add(pkt, now)
        if evicted is not None:
            self.drop(evicted, "buffer_overflow")

    # discovery -------------------------------------------------------------

    def _discover(self, dest):
        if dest not in self.pending:
            self._send_rreq(dest, 0)

    def _send_rreq(self, dest, tries):
        self.seq += 1
        self.rreq_id += 1
        e = self.table.get(dest)
        known = e.dest_seq if e is not None and e.seq_known else None
        pkt = Packet(Kind.RREQ, self.node, dest, RREQ_BYTES, self.sim.now,
                     origin=self.node, target=dest, rreq_id=self.rreq_id,
                     orig_seq=self.seq, dest_seq=known, hop_count=0)
        pkt.ttl = self.params.net_diameter
        self.seen[(self.node, self.rreq_id)] = RreqRecord(self.node, self.rreq_id,
                                                         self.sim.now, 0)
        self.broadcast(pkt, jitter=False)
        wait = self.params.net_traversal_time * (2 ** tries)
        self.pending[dest] = self.sim.after(wait, self._rreq_timeout, dest, tries)

    def _rreq_timeout(self, dest, tries):
        self.pending.pop(dest, None)
        if not self.net.alive(self.node):
            return
        for old in self.buffer.expire(self.sim.now):
            self.drop(old, "buffer_timeout")
        if not self.buffer.has(dest):
            return
        if self._valid(dest) is not None:
            self._route_ready(dest)
        elif tries < self.params.rreq_retries:
            self._send_rreq(dest, tries + 1)
        else:
            for pkt in self.buffer.take(dest):
                self.drop(pkt, "no_route")

    # control plane ---------------------------------------------------------

    def receive(self, pkt, prev):
        kind = pkt.kind
        self._touch_neighbor(prev)
        if kind is Kind.DATA:
            self._on_data(pkt, prev)
        elif kind is Kind.RREQ:
            self._on_rreq(pkt, prev)
        elif kind is Kind.RREP:
            self._on_rrep(pkt, prev)
        elif kind is Kind.RERR:
            self._on_rerr(pkt, prev)
        elif kind is Kind.HELLO:
            self._on_hello(pkt, prev)

    def _on_data(self, pkt, prev):
        pkt.hops += 1
        if pkt.dst == self.node:
            self.net.deliver_local(self.node, pkt)
            return
        pkt.ttl -= 1
        if pkt.ttl <= 0:
            self.drop(pkt, "ttl")
            return
        self._forward(pkt, prev)

    def _on_rreq(self, pkt, prev):
        if pkt.origin == self.node:
            return
        hops = pkt.hop_count + 1
        key = (pkt.origin, pkt.rreq_id)
        rec = self.seen.get(key)
        if rec is not None and hops >= rec.best_hops:
            return
        if rec is None:
            self.seen[key] = RreqRecord(pkt.origin, pkt.rreq_id, self.sim.now, hops)
        else:
            rec.best_hops = hops
        lifetime = self.params.active_route_timeout
        self._update_route(pkt.origin, prev, hops, pkt.orig_seq, lifetime)
        back = self._valid(pkt.origin)
        if back is None:
            return
        if pkt.target == self.node:
            if pkt.dest_seq is not None and pkt.dest_seq > self.seq:
                self.seq = pkt.dest_seq
            self._reply(pkt.origin, self.node, self.seq, 0, back)
            return
        if self.params.aodv_intermediate_reply:
            e = self._valid(pkt.target)
            # a route about to expire is not worth offering to the origin
            if (e is not None and e.seq_known
                    and e.expiry - self.sim.now >= self.params.net_traversal_time
                    and (pkt.dest_seq is None or e.dest_seq >= pkt.dest_seq)):
                e.precursors.add(prev)
                back.precursors.add(e.next_hop)
                self._reply(pkt.origin, pkt.target, e.dest_seq, e.hop_count, back)
                return
        if pkt.ttl <= 1:
            return
        fwd = Packet(Kind.RREQ, pkt.src, pkt.dst, pkt.size, pkt.created,
                     origin=pkt.origin, target=pkt.target, rreq_id=pkt.rreq_id,
                     orig_seq=pkt.orig_seq, dest_seq=pkt.dest_seq, hop_count=hops)
        fwd.ttl = pkt.ttl - 1
        self.broadcast(fwd)

    def _reply(self, origin, target, seq, hops, back):
        rrep = Packet(Kind.RREP, self.node, origin, RREP_BYTES, self.sim.now,
                      target=target, dest_seq=seq, hop_count=hops)
        self.send(rrep, back.next_hop)

    def _on_rrep(self, pkt, prev):
        hops = pkt.hop_count + 1
        before = self.table.get(pkt.target)
        stale = (before is not None and before.seq_known and before.valid
                 and pkt.dest_seq < before.dest_seq)
        self._update_route(pkt.target, prev, hops, pkt.dest_seq,
                           self.params.active_route_timeout)
        if pkt.dst == self.node or stale:
            if stale:
                self.stale_rreps += 1
            return
        back = self._valid(pkt.dst)
        if back is None:
            self.orphan_rreps += 1
            return
        e = self.table.get(pkt.target)
        if e is not None:
            e.precursors.add(back.next_hop)
        fwd = Packet(Kind.RREP, pkt.src, pkt.dst, pkt.size, pkt.created,
                     target=pkt.target, dest_seq=pkt.dest_seq, hop_count=hops)
        self.send(fwd, back.next_hop)

    def _on_hello(self, pkt, prev):
        self._update_route(prev, prev, 1, pkt.dest_seq,
                           self.params.allowed_hello_loss * self.params.hello_interval)

    def _on_rerr(self, pkt, prev):
        lost = []
        for dest, seq in pkt.entries:
            e = self.table.get(dest)
            if e is not None and e.valid and e.next_hop == prev:
                e.valid = False
                e.dest_seq = max(e.dest_seq, seq)
                if e.precursors:
                    lost.append((dest, e.dest_seq))
                    e.precursors = set()
        if lost:
            self._send_rerr(lost)

    def _send_rerr(self, entries):
        pkt = Packet(Kind.RERR, self.node, BROADCAST, rerr_bytes(len(entries)), self.sim.now,
                     entries=tuple(entries))
        self.broadcast(pkt)

    # neighbor maintenance --------------------------------------------------

    def _hello(self):
        if not self.net.alive(self.node):
            return
        pkt = Packet(Kind.HELLO, self.node, BROADCAST, RREP_BYTES, self.sim.now,
                     target=self.node, dest_seq=self.seq, hop_count=0)
        self.broadcast(pkt, jitter=False)
        timeout = self.params.allowed_hello_loss * self.params.hello_interval
        now = self.sim.now
        for nbr, heard in list(self.last_heard.items()):
            if now - heard > timeout:
                self._link_break(nbr)
        self.sim.after(self.params.hello_interval, self._hello)

    def _link_break(self, nbr):
        self.last_heard.pop(nbr, None)
        lost = []
        for dest, e in self.table.items():
            if e.valid and e.next_hop == nbr:
                e.valid = False
                if e.seq_known:
                    e.dest_seq += 1
                if e.precursors:
                    lost.append((dest, e.dest_seq))
                    e.precursors = set()
        if lost:
            self._send_rerr(lost)
        for pkt in self.net.purge(self.node, nbr):
            self._reroute(pkt)

    def _reroute(self, pkt):
        if pkt.kind is Kind.DATA:
            self._forward(pkt)

    def link_feedback(self, pkt, next_hop, success, cause):
        if success:
            return
        self._link_break(next_hop)
        if pkt.kind is not Kind.DATA:
            return
        if pkt.src == self.node:
            self._forward(pkt)
        else:
            self.drop(pkt, cause)
