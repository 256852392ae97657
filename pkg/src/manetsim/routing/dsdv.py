"""Destination-Sequenced Distance Vector routing."""

from __future__ import annotations

from ..packet import BROADCAST, IP_HEADER, Kind, Packet
from .base import INFINITY, Action, Lookup, RouteEntry, Router


# A live route is only displaced by a longer one carrying a newer sequence
# number once its next hop has gone this many dump periods without
# re-advertising it.
SETTLE_PERIODS = 1.5

# The first full dump goes out within this many seconds of start-up, so a
# fresh node does not stay invisible for most of a dump interval.
STARTUP_JITTER = 2.0


def update_bytes(n_entries):
    return IP_HEADER + 4 + 12 * n_entries


class Dsdv(Router):
    """DSDV with periodic full dumps and triggered incremental updates.

    Own sequence numbers are even and grow by two per dump; a broken route
    is advertised with infinite metric and the next odd number. Only metric
    changes trigger an immediate update; sequence-only changes wait for the
    next periodic dump.

    A newer sequence number arriving over a longer path does not displace a
    route its next hop keeps refreshing; otherwise the periodic bumps would
    keep flipping routes to whichever neighbor happened to dump first.
    """

    name = "dsdv"
    control_first = False

    def __init__(self, node, net, params):
        super().__init__(node, net, params)
        self.seq = 0
        self.table: dict[int, RouteEntry] = {node: RouteEntry(node, node, 0, 0)}
        self.changed: set = set()
        self.last_heard: dict[int, float] = {}
        self.trigger = None
        self.updates_sent = 0

    def start(self):
        spread = min(STARTUP_JITTER, self.params.dump_interval)
        first = self.net.routing_rng.uniform(None, 0.0, spread)
        self.sim.schedule(first, self._periodic)

    # advertisements --------------------------------------------------------

    def _periodic(self):
        if not self.net.alive(self.node):
            return
        p = self.params
        now = self.sim.now
        self.seq += 2
        self.table[self.node].dest_seq = self.seq
        timeout = p.dsdv_neighbor_periods * p.dump_interval
        for nbr, heard in list(self.last_heard.items()):
            if now - heard > timeout:
                self._link_break(nbr)
        if self.trigger is not None:
            self.trigger.cancel()
            self.trigger = None
        self.changed.clear()
        self._advertise(sorted(self.table))
        self.sim.after(p.dump_interval, self._periodic)

    def _advertise(self, dests):
        entries = tuple((d, self.table[d].hop_count, self.table[d].dest_seq) for d in dests)
        pkt = Packet(Kind.DSDV_UPDATE, self.node, BROADCAST, update_bytes(len(entries)),
                     self.sim.now, entries=entries)
        self.updates_sent += 1
        self.broadcast(pkt)

    def _schedule_trigger(self):
        if self.params.triggered_updates and self.trigger is None:
            self.trigger = self.sim.after(0.0, self._triggered)

    def _triggered(self):
        self.trigger = None
        if not self.net.alive(self.node) or not self.changed:
            return
        dests = sorted(self.changed)
        self.changed.clear()
        self._advertise(dests)

    def _on_update(self, pkt, prev):
        significant = False
        now = self.sim.now
        table = self.table
        settle = SETTLE_PERIODS * self.params.dump_interval
        for dest, metric, seq in pkt.entries:
            if dest == self.node:
                if seq > self.seq:
                    # someone declared us unreachable: supersede with a fresh even number
                    self.seq = seq + 1 if seq % 2 else seq + 2
                    table[self.node].dest_seq = self.seq
                    self.changed.add(self.node)
                    significant = True
                continue
            hops = metric + 1
            e = table.get(dest)
            if e is None:
                if hops < INFINITY:
                    table[dest] = RouteEntry(dest, prev, hops, seq, install_time=now)
                    self.changed.add(dest)
                    significant = True
                continue
            if seq < e.dest_seq:
                continue
            if seq == e.dest_seq:
                if hops < e.hop_count:
                    switch = True
                else:
                    if prev == e.next_hop and hops == e.hop_count:
                        e.install_time = now
                    continue
            else:
                switch = (prev == e.next_hop or hops <= e.hop_count
                          or now - e.install_time > settle)
            if switch:
                if hops != e.hop_count:
                    significant = True
                e.next_hop = prev
                e.hop_count = hops
                e.dest_seq = seq
                e.install_time = now
                self.changed.add(dest)
        if significant:
            self._schedule_trigger()

    # data path -------------------------------------------------------------

    def route_lookup(self, dest) -> Lookup:
        if dest == self.node:
            return Lookup(Action.DELIVER)
        e = self.table.get(dest)
        if e is not None and e.hop_count < INFINITY:
            return Lookup(Action.FORWARD, e.next_hop)
        return Lookup(Action.DROP)

    def originate(self, pkt):
        self._route(pkt)

    def _route(self, pkt):
        look = self.route_lookup(pkt.dst)
        if look.action is Action.DELIVER:
            self.net.deliver_local(self.node, pkt)
        elif look.action is Action.FORWARD:
            self.send(pkt, look.next_hop)
        else:
            self.drop(pkt, "no_route")

    def receive(self, pkt, prev):
        self.last_heard[prev] = self.sim.now
        if pkt.kind is Kind.DSDV_UPDATE:
            self._on_update(pkt, prev)
        elif pkt.kind is Kind.DATA:
            pkt.hops += 1
            if pkt.dst != self.node:
                pkt.ttl -= 1
                if pkt.ttl <= 0:
                    self.drop(pkt, "ttl")
                    return
            self._route(pkt)

    # maintenance -----------------------------------------------------------

    def _link_break(self, nbr):
        self.last_heard.pop(nbr, None)
        broken = False
        for dest, e in self.table.items():
            if dest != self.node and e.next_hop == nbr and e.hop_count < INFINITY:
                e.hop_count = INFINITY
                e.dest_seq += 1
                self.changed.add(dest)
                broken = True
        if broken:
            self._schedule_trigger()
        for pkt in self.net.purge(self.node, nbr):
            if pkt.kind is Kind.DATA:
                self._route(pkt)

    def link_feedback(self, pkt, next_hop, success, cause):
        if success:
            return
        self._link_break(next_hop)
        if pkt.kind is Kind.DATA:
            self.drop(pkt, cause)
