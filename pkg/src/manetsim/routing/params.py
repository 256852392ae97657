from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class RoutingParams:
    hello_interval: float = 1.0
    allowed_hello_loss: int = 2
    active_route_timeout: float = 10.0
    rreq_retries: int = 3
    node_traversal_time: float = 0.04
    net_diameter: int = 35
    aodv_intermediate_reply: bool = True
    dsr_cache_size: int = 64
    send_buffer_size: int = 64
    send_buffer_timeout: float = 30.0
    dsr_reply_from_cache: bool = True
    dsr_gratuitous_reply: bool = False
    dsr_request_period: float = 0.5
    dsr_max_request_period: float = 10.0
    dump_interval: float = 15.0
    triggered_updates: bool = True
    dsdv_neighbor_periods: int = 3
    broadcast_jitter: float = 0.01

    @property
    def net_traversal_time(self) -> float:
        return 2 * self.node_traversal_time * self.net_diameter
