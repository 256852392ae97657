"""Simplified CSMA/CA shared channel.

Nodes sense the carrier, wait DIFS plus a slotted random backoff, and
transmit. Unicast frames are acknowledged implicitly: the sender learns the
outcome SIFS + ACK airtime after the frame ends, and retries with a doubled
contention window until the retry limit. Receivers decode a frame when it
clears the reception threshold and dominates the summed power of every
overlapping frame by the capture ratio.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .packet import BROADCAST, Packet


@dataclass(frozen=True)
class MacParams:
    link_rate: float = 2e6
    slot: float = 20e-6
    sifs: float = 10e-6
    difs: float = 50e-6
    cw_min: int = 32
    cw_max: int = 1024
    retry_limit: int = 7
    header_bytes: int = 58
    ack_bytes: int = 14
    queue_capacity: int = 50
    capture_db: float = 10.0
    priority_queue: bool = False

    def __post_init__(self):
        if self.link_rate <= 0 or self.slot <= 0:
            raise ValueError("link rate and slot must be positive")
        if not 1 <= self.cw_min <= self.cw_max:
            raise ValueError("need 1 <= cw_min <= cw_max")
        if self.retry_limit < 0 or self.queue_capacity < 1:
            raise ValueError("bad retry limit or queue capacity")

    @property
    def capture_ratio(self) -> float:
        return 10.0 ** (self.capture_db / 10.0)

    @property
    def ack_time(self) -> float:
        return self.ack_bytes * 8 / self.link_rate

    def frame_bits(self, packet_bytes: int) -> int:
        return (packet_bytes + self.header_bytes) * 8


class Frame:
    __slots__ = ("packet", "tx", "next_hop", "tx_power_w", "start_time", "duration",
                 "end", "sense_end", "bits", "power", "overlaps")

    def __init__(self, packet: Packet, tx: int, next_hop: int, start_time: float,
                 params: MacParams, tx_power_w: float = 0.0):
        self.packet = packet
        self.tx = tx
        self.next_hop = next_hop
        self.tx_power_w = tx_power_w
        self.start_time = start_time
        self.bits = params.frame_bits(packet.size)
        self.duration = self.bits / params.link_rate
        self.end = start_time + self.duration
        # unicast frames keep the medium reserved through the ACK exchange
        self.sense_end = self.end if next_hop == BROADCAST else \
            self.end + params.sifs + params.ack_time
        self.power = None
        self.overlaps = []

    @property
    def broadcast(self) -> bool:
        return self.next_hop == BROADCAST

    def __repr__(self):
        return f"Frame({self.packet!r}, {self.tx}->{self.next_hop}, t={self.start_time:.6f})"


def resolve_reception(powers, rx_thresh: float, capture_ratio: float = 10.0):
    """Index of the frame a receiver decodes among overlapping ``powers``.

    Returns None when nothing is decoded: no frame reaches ``rx_thresh`` or
    none exceeds the sum of the others by ``capture_ratio``.
    """
    total = float(sum(powers))
    for i, p in enumerate(powers):
        if p >= rx_thresh and p >= capture_ratio * (total - p):
            return i
    return None


def classify_reception(powers, rx_thresh, cs_thresh, capture_ratio=10.0):
    """Per-frame fate at one receiver: delivered, collision, sensed or missed."""
    winner = resolve_reception(powers, rx_thresh, capture_ratio)
    out = []
    for i, p in enumerate(powers):
        if i == winner:
            out.append("delivered")
        elif p < cs_thresh:
            out.append("missed")
        elif p < rx_thresh:
            out.append("sensed")
        else:
            out.append("collision")
    return out


class Channel:
    """The shared medium: active frames, sensing, and reception outcomes."""

    def __init__(self, n, sim, params: MacParams, radio, power_fn, energy, deliver,
                 charge_overheard=True, tracer=None):
        self.n = n
        self.sim = sim
        self.params = params
        self.radio = radio
        self.power_fn = power_fn
        self.energy = energy
        self.deliver = deliver
        self.charge_overheard = charge_overheard
        self.tracer = tracer
        self.macs: list[Mac] = []
        self.active: list[Frame] = []
        self.frames_sent = 0
        self.collisions = 0

    def busy_until(self, node: int, now: float) -> float:
        """When the medium frees up as sensed by ``node``; <= now if idle.

        Frames that start at exactly ``now`` are not yet sensed, which is
        how equal backoffs turn into collisions.
        """
        cs = self.radio.cs_thresh
        busy = 0.0
        keep = []
        for f in self.active:
            if f.sense_end <= now:
                continue
            keep.append(f)
            if f.start_time < now and f.sense_end > busy and f.power[node] >= cs:
                busy = f.sense_end
        self.active = keep
        return busy

    def transmit(self, frame: Frame) -> None:
        now = self.sim.now
        frame.power = self.power_fn(frame.tx, now)
        for g in self.active:
            if g.end > now and g.sense_end > now:
                g.overlaps.append(frame)
                frame.overlaps.append(g)
        self.active.append(frame)
        self.frames_sent += 1
        if self.tracer is not None:
            self.tracer("s", now, frame.tx, frame.packet)
        self.sim.schedule(frame.end, self._finish, frame)

    def _finish(self, frame: Frame) -> None:
        radio = self.radio
        p = frame.power
        energy = self.energy
        busy = np.zeros(self.n, dtype=bool)
        busy[frame.tx] = True
        if frame.overlaps:
            interference = np.zeros(self.n)
            for g in frame.overlaps:
                interference += g.power
                busy[g.tx] = True
        else:
            interference = None
        hearing = (p >= radio.rx_thresh) & ~busy & ~energy.dead
        if interference is None:
            decoded = hearing
        else:
            decoded = hearing & (p >= self.params.capture_ratio * interference)
            self.collisions += int(np.count_nonzero(hearing & ~decoded))

        nh = frame.next_hop
        if self.charge_overheard:
            charged = np.nonzero(hearing)[0]
        elif frame.broadcast:
            charged = np.nonzero(decoded)[0]
        else:
            charged = np.array([nh]) if decoded[nh] else np.empty(0, dtype=int)
        energy.debit_rx_many(charged, frame.bits)
        decoded &= ~energy.dead

        pkt = frame.packet
        tx = frame.tx
        if frame.broadcast:
            for node in np.nonzero(decoded)[0]:
                self.deliver(int(node), pkt, tx)
            self.macs[tx].tx_finished(frame, True, None)
            return
        if decoded[nh]:
            self.deliver(nh, pkt, tx)
            self.macs[tx].tx_finished(frame, True, None)
            return
        if p[nh] < radio.rx_thresh:
            cause = "below_threshold"
        elif busy[nh] or energy.dead[nh]:
            cause = "retry"
        else:
            cause = "collision"
        self.macs[tx].tx_finished(frame, False, cause)


class Mac:
    """Per-node interface queue and CSMA/CA transmitter."""

    def __init__(self, node: int, sim, params: MacParams, channel: Channel, rng, energy,
                 on_drop, tx_power_w=0.0):
        self.node = node
        self.sim = sim
        self.params = params
        self.channel = channel
        self.rng = rng
        self.energy = energy
        self.on_drop = on_drop
        self.tx_power_w = tx_power_w
        self.listener = None
        self.ctrl_queue: deque = deque()
        self.data_queue: deque = deque()
        self.current = None
        self.retries = 0
        self.cw = params.cw_min
        self.slots = 0
        self.causes: list = []
        self.pending = None
        self.dead = False
        self.retransmissions = 0

    def __len__(self):
        return len(self.ctrl_queue) + len(self.data_queue)

    def try_send(self, pkt: Packet, next_hop: int) -> str:
        if self.dead:
            self.on_drop(pkt, "energy")
            return "dropped"
        if len(self) >= self.params.queue_capacity:
            self.on_drop(pkt, "queue")
            return "dropped"
        if self.params.priority_queue and pkt.is_control:
            self.ctrl_queue.append((pkt, next_hop))
        else:
            self.data_queue.append((pkt, next_hop))
        if self.current is None:
            self._next()
        return "queued"

    def purge(self, next_hop: int) -> list:
        """Remove and return queued packets addressed to ``next_hop``."""
        out = []
        for q in (self.ctrl_queue, self.data_queue):
            keep = [item for item in q if item[1] != next_hop]
            out.extend(pkt for pkt, nh in q if nh == next_hop)
            q.clear()
            q.extend(keep)
        return out

    def shutdown(self) -> None:
        """Node died: drop everything it holds and stop contending."""
        self.dead = True
        items = list(self.ctrl_queue) + list(self.data_queue)
        if self.pending is not None:
            # contending, not on air: the head frame is lost too
            self.pending.cancel()
            self.pending = None
            items.insert(0, self.current)
            self.current = None
        self.ctrl_queue.clear()
        self.data_queue.clear()
        for pkt, _ in items:
            self.on_drop(pkt, "energy")

    def _next(self) -> None:
        if self.dead:
            return
        if self.ctrl_queue:
            self.current = self.ctrl_queue.popleft()
        elif self.data_queue:
            self.current = self.data_queue.popleft()
        else:
            self.current = None
            return
        self.retries = 0
        self.cw = self.params.cw_min
        self.causes = []
        self._backoff()

    def _backoff(self) -> None:
        now = self.sim.now
        self.slots = self.rng.integer(self.cw)
        start = max(now, self.channel.busy_until(self.node, now))
        self.pending = self.sim.schedule(
            start + self.params.difs + self.slots * self.params.slot, self._attempt)

    def _attempt(self) -> None:
        self.pending = None
        if self.dead:
            return
        now = self.sim.now
        busy = self.channel.busy_until(self.node, now)
        if busy > now:
            self.pending = self.sim.schedule(
                busy + self.params.difs + self.slots * self.params.slot, self._attempt)
            return
        pkt, nh = self.current
        frame = Frame(pkt, self.node, nh, now, self.params, self.tx_power_w)
        self.energy.debit_tx(self.node, frame.bits)
        self.channel.transmit(frame)

    def tx_finished(self, frame: Frame, success: bool, cause) -> None:
        if self.dead:
            self.current = None
            if not frame.broadcast:
                self.on_drop(frame.packet, "energy")
            return
        if frame.broadcast:
            self._done()
            return
        self.sim.schedule(frame.sense_end, self._ack_result, success, cause)

    def _done(self) -> None:
        self.current = None
        self._next()

    def _ack_result(self, success: bool, cause) -> None:
        pkt, nh = self.current
        if success:
            self.current = None
            if self.listener is not None:
                self.listener.link_feedback(pkt, nh, True, None)
            if self.current is None:
                self._next()
            return
        self.retries += 1
        self.causes.append(cause)
        if self.retries > self.params.retry_limit:
            self.current = None
            final = self.causes[0] if len(set(self.causes)) == 1 else "retry"
            if self.listener is not None:
                self.listener.link_feedback(pkt, nh, False, final)
            else:
                self.on_drop(pkt, final)
            if self.current is None:
                self._next()
            return
        self.retransmissions += 1
        self.cw = min(2 * self.cw, self.params.cw_max)
        self._backoff()
