"""Routing protocols."""

from .aodv import Aodv
from .base import INFINITY, Action, Lookup, RouteEntry, Router, SendBuffer, SourceRoute
from .dsdv import Dsdv
from .dsr import Dsr
from .params import RoutingParams

PROTOCOLS = {"aodv": Aodv, "dsr": Dsr, "dsdv": Dsdv}


def router_class(protocol: str):
    try:
        return PROTOCOLS[protocol]
    except KeyError:
        raise ValueError(f"unknown protocol {protocol!r}") from None


__all__ = ["Aodv", "Dsr", "Dsdv", "PROTOCOLS", "router_class", "RoutingParams", "Router",
           "RouteEntry", "SendBuffer", "SourceRoute", "Lookup", "Action", "INFINITY"]
