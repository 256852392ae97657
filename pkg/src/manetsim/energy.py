"""Per-node battery accounting for transmissions and receptions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class EnergyError(RuntimeError):
    pass


@dataclass(frozen=True)
class Battery:
    initial_j: float
    remaining_j: float
    tx_power_w: float
    rx_power_w: float

    @property
    def alive(self) -> bool:
        return self.remaining_j > 0


class EnergyModel:
    """Batteries for ``n`` nodes.

    A frame of ``bits`` costs ``power * bits / link_rate`` joules, i.e. the
    radio power times the frame airtime. Charges are floored at zero; a node
    whose battery hits zero is dead and ``on_death(node)`` fires once.
    """

    def __init__(self, n, initial_j=100.0, tx_power_w=0.660, rx_power_w=0.395,
                 link_rate=2e6, on_death=None):
        if initial_j <= 0:
            raise ValueError("initial energy must be positive")
        self.n = n
        self.initial_j = float(initial_j)
        self.tx_power_w = tx_power_w
        self.rx_power_w = rx_power_w
        self.link_rate = link_rate
        self.remaining = np.full(n, float(initial_j))
        self.charged = np.zeros(n)
        self.dead = np.zeros(n, dtype=bool)
        self.floor_events = 0
        self.rejected = 0
        self.on_death = on_death

    def tx_cost(self, bits) -> float:
        return self.tx_power_w * bits / self.link_rate

    def rx_cost(self, bits) -> float:
        return self.rx_power_w * bits / self.link_rate

    def alive(self, node: int) -> bool:
        return not self.dead[node]

    def _charge(self, node, joules):
        if self.dead[node]:
            self.rejected += 1
            raise EnergyError(f"node {node} is dead")
        self.charged[node] += joules
        left = self.remaining[node] - joules
        if left <= 0:
            if left < 0:
                self.floor_events += 1
            self.remaining[node] = 0.0
            self.dead[node] = True
            if self.on_death is not None:
                self.on_death(node)
        else:
            self.remaining[node] = left
        return joules

    def debit_tx(self, node: int, frame_bits: int) -> float:
        return self._charge(node, self.tx_cost(frame_bits))

    def debit_rx(self, node: int, frame_bits: int) -> float:
        return self._charge(node, self.rx_cost(frame_bits))

    def debit_rx_many(self, nodes: np.ndarray, frame_bits: int) -> float:
        """Charge one reception to each node in ``nodes`` (all must be alive)."""
        if nodes.size == 0:
            return 0.0
        cost = self.rx_cost(frame_bits)
        self.charged[nodes] += cost
        self.remaining[nodes] -= cost
        drained = nodes[self.remaining[nodes] <= 0]
        for node in drained:
            if self.remaining[node] < 0:
                self.floor_events += 1
            self.remaining[node] = 0.0
            self.dead[node] = True
            if self.on_death is not None:
                self.on_death(int(node))
        return cost * nodes.size

    def total_consumed(self, node: int) -> float:
        return self.initial_j - float(self.remaining[node])

    def battery(self, node: int) -> Battery:
        return Battery(self.initial_j, float(self.remaining[node]), self.tx_power_w,
                       self.rx_power_w)

    def residuals(self):
        return [(self.initial_j, float(r)) for r in self.remaining]
