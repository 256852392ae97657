"""Assembles nodes, channel, routers and traffic for one simulation run."""

from __future__ import annotations

import itertools
from collections import Counter

import numpy as np

from .config import ScenarioConfig
from .energy import EnergyModel
from .kernel import Simulator, stream
from .mac import Channel, Mac
from .metrics import MetricsLedger
from .mobility import RandomWaypoint
from .packet import BROADCAST, Kind, Packet
from .propagation import channel_gain, mean_power_sq
from .routing import router_class
from .traffic import CbrSource, Sink, build_connections

STREAMS = ("topology", "mobility", "traffic", "fading", "mac-backoff", "routing")

# Closer than this the far-field formulas blow up; treat it as the distance.
MIN_DISTANCE = 0.1


class PacketTrace:
    """Collects `event t node kind uid src dst size` lines."""

    def __init__(self):
        self.lines: list[str] = []

    def __call__(self, event, t, node, pkt):
        self.lines.append(f"{event} {t:.9f} {node} {pkt.kind.value} {pkt.uid} "
                          f"{pkt.src} {pkt.dst} {pkt.size}")


class Network:
    """One fully wired scenario.

    ``positions`` pins the initial coordinates; with ``link_matrix`` the
    radio is replaced by a fixed boolean adjacency (linked pairs receive ten
    times the reception threshold, others nothing), which makes static
    unit-disk experiments exact.
    """

    def __init__(self, cfg: ScenarioConfig, positions=None, link_matrix=None,
                 connections=None, trace=False):
        Packet._ids = itertools.count()
        self.cfg = cfg
        self.sim = Simulator()
        self.streams = {label: stream(label, cfg.seed) for label in STREAMS}
        self.routing_rng = self.streams["routing"]
        n = self.n = cfg.nodes
        static = link_matrix is not None or cfg.v_max == 0
        self.mobility = RandomWaypoint(
            n, cfg.width, cfg.height, cfg.sim_time, self.streams["topology"],
            self.streams["mobility"], v_min=cfg.v_min, v_max=cfg.v_max, pause=cfg.pause,
            positions=positions, static=static)
        self.radio = cfg.radio()
        self.fading = cfg.fading()
        self.link_matrix = None if link_matrix is None else np.array(link_matrix, bool)
        self._mean_sq = mean_power_sq(self.fading, self.radio)
        self._mean_cache: dict = {}
        self.ledger = MetricsLedger(sim_time=cfg.sim_time)
        self.control_drops: Counter = Counter()
        self.tracer = PacketTrace() if trace else None
        mac_params = cfg.mac()
        self.energy = EnergyModel(n, cfg.initial_energy, cfg.tx_power, cfg.rx_power,
                                  mac_params.link_rate, on_death=self._on_death)
        self.channel = Channel(n, self.sim, mac_params, self.radio, self._power_from,
                               self.energy, self._deliver, cfg.charge_overheard, self.tracer)
        backoff = self.streams["mac-backoff"]
        self.macs = [Mac(i, self.sim, mac_params, self.channel, backoff, self.energy,
                         self.drop, cfg.tx_power) for i in range(n)]
        self.channel.macs = self.macs
        params = cfg.routing()
        cls = router_class(cfg.protocol)
        self.routers = [cls(i, self, params) for i in range(n)]
        for mac, router in zip(self.macs, self.routers):
            mac.listener = router
        if connections is None:
            connections = build_connections(
                cfg.connections, n, self.streams["traffic"], cfg.sim_time, cfg.rate_pps,
                cfg.payload_bytes, cfg.start_window)
        self.connections = list(connections)
        self.sinks = {c.cid: Sink(c, self.ledger) for c in self.connections}
        self.sources = [CbrSource(c, self.sim, self.originate) for c in self.connections]
        self.live: set = set()
        self.finished = False

    # radio ------------------------------------------------------------------

    def _power_from(self, tx: int, t: float) -> np.ndarray:
        if self.link_matrix is not None:
            p = np.where(self.link_matrix[tx], 10.0 * self.radio.rx_thresh, 0.0)
            p[tx] = 0.0
            return p
        mean = self._mean_cache.get(tx) if self.mobility.static else None
        if mean is None:
            pos = self.mobility.positions(t)
            diff = pos - pos[tx]
            d2 = np.einsum("ij,ij->i", diff, diff)
            np.maximum(d2, MIN_DISTANCE ** 2, out=d2)
            mean = self._mean_sq(d2)
            mean[tx] = 0.0
            if self.mobility.static:
                self._mean_cache[tx] = mean
        gain = channel_gain(self.fading, self.streams["fading"], self.n)
        return mean.copy() if gain is None else mean * gain

    # services used by routers -------------------------------------------------

    @property
    def now(self) -> float:
        return self.sim.now

    def alive(self, node: int) -> bool:
        return not self.energy.dead[node]

    def _count_control(self, pkt):
        if pkt.is_control:
            self.ledger.control_overhead += 1
            self.ledger.control_by_kind[pkt.kind.value] += 1

    def send(self, node: int, pkt: Packet, next_hop: int) -> str:
        self._count_control(pkt)
        return self.macs[node].try_send(pkt, next_hop)

    def broadcast(self, node: int, pkt: Packet, jitter=True) -> None:
        self._count_control(pkt)
        spread = self.cfg.broadcast_jitter
        if jitter and spread > 0:
            delay = self.routing_rng.uniform(None, 0.0, spread)
            self.sim.after(delay, self.macs[node].try_send, pkt, BROADCAST)
        else:
            self.macs[node].try_send(pkt, BROADCAST)

    def drop(self, pkt: Packet, reason: str) -> None:
        if self.tracer is not None:
            self.tracer("d", self.sim.now, pkt.src, pkt)
        if pkt.kind is not Kind.DATA:
            self.control_drops[reason] += 1
            return
        if pkt.uid in self.live:
            self.live.discard(pkt.uid)
            self.ledger.record_drop(reason)

    def deliver_local(self, node: int, pkt: Packet) -> None:
        if pkt.kind is not Kind.DATA:
            return
        sink = self.sinks.get(pkt.conn)
        if sink is not None:
            sink.sink_receive(pkt, self.sim.now)
        self.live.discard(pkt.uid)

    def purge(self, node: int, next_hop: int) -> list:
        return self.macs[node].purge(next_hop)

    # plumbing -----------------------------------------------------------------

    def _deliver(self, node: int, pkt: Packet, prev: int) -> None:
        if self.energy.dead[node]:
            return
        if self.tracer is not None:
            self.tracer("r", self.sim.now, node, pkt)
        self.routers[node].receive(pkt, prev)

    def _on_death(self, node: int) -> None:
        self.macs[node].shutdown()

    def originate(self, pkt: Packet) -> None:
        self.ledger.cbr_sent += 1
        self.live.add(pkt.uid)
        if self.energy.dead[pkt.src]:
            self.drop(pkt, "energy")
            return
        self.routers[pkt.src].originate(pkt)

    def run(self) -> MetricsLedger:
        if self.finished:
            raise RuntimeError("a Network runs once")
        for router in self.routers:
            router.start()
        for source in self.sources:
            source.start()
        self.sim.run_until(self.cfg.sim_time)
        self.finished = True
        ledger = self.ledger
        ledger.in_flight = len(self.live)
        ledger.per_node_residual = self.energy.residuals()
        return ledger

    def trace_text(self) -> str:
        out = ["# mobility: t node x y"]
        out.extend(self.mobility.trace_lines())
        if self.tracer is not None:
            out.append("# packets: event t node kind uid src dst size")
            out.extend(self.tracer.lines)
        return "\n".join(out) + "\n"
