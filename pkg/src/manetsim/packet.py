"""Simulated frames and their header accounting."""

from __future__ import annotations

import enum
import itertools

BROADCAST = -1

IP_HEADER = 20
UDP_IP_HEADER = 28


class Kind(enum.Enum):
    DATA = "data"
    RREQ = "rreq"
    RREP = "rrep"
    RERR = "rerr"
    HELLO = "hello"
    DSDV_UPDATE = "dsdv-update"


CONTROL_KINDS = frozenset(k for k in Kind if k is not Kind.DATA)


class Packet:
    """One network-layer packet.

    ``size`` is the network-layer size in bytes (payload plus transport and
    routing headers); the MAC adds its own header when the frame is built.
    Control packets carry their protocol fields as attributes; unused ones
    stay ``None``.
    """

    __slots__ = (
        "uid", "kind", "src", "dst", "size", "created", "conn", "seq", "hops",
        "ttl", "route", "origin", "target", "rreq_id", "orig_seq", "dest_seq", "hop_count",
        "entries", "link",
    )

    _ids = itertools.count()

    def __init__(self, kind: Kind, src: int, dst: int, size: int, created: float = 0.0,
                 **fields):
        self.uid = next(Packet._ids)
        self.kind = kind
        self.src = src
        self.dst = dst
        self.size = size
        self.created = created
        self.conn = None
        self.seq = None
        self.hops = 0
        self.ttl = 64
        self.route = None
        self.origin = None
        self.target = None
        self.rreq_id = None
        self.orig_seq = None
        self.dest_seq = None
        self.hop_count = None
        self.entries = None
        self.link = None
        for key, value in fields.items():
            setattr(self, key, value)

    @property
    def is_control(self) -> bool:
        return self.kind is not Kind.DATA

    def __repr__(self):
        return (f"Packet({self.kind.value}, uid={self.uid}, {self.src}->{self.dst}, "
                f"{self.size}B)")


def data_size(payload_bytes: int) -> int:
    return payload_bytes + UDP_IP_HEADER


def source_route_size(route) -> int:
    """DSR option header: 4 fixed bytes plus one 4-byte address per hop."""
    return 4 + 4 * len(route)
