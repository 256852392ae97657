"""Run ledger and the four headline metrics."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

CSV_COLUMNS = (
    "protocol", "propagation", "nodes", "connections", "seed", "sim_time_s",
    "pdf_percent", "avg_e2e_delay_s", "throughput_bps", "mrre_percent",
    "total_energy_j", "ctrl_packets", "sent", "received", "drop_collision",
    "drop_no_route", "drop_retry", "drop_queue",
)

# Ledger drop reasons folded into the four exported drop columns.
CSV_DROP_GROUPS = {
    "drop_collision": ("collision",),
    "drop_no_route": ("no_route", "buffer_timeout", "malformed", "ttl"),
    "drop_retry": ("retry", "below_threshold", "energy"),
    "drop_queue": ("queue", "buffer_overflow"),
}

DROP_REASONS = tuple(r for group in CSV_DROP_GROUPS.values() for r in group)


@dataclass
class MetricsLedger:
    sim_time: float = 0.0
    cbr_sent: int = 0
    cbr_received: int = 0
    duplicates: int = 0
    delay_sum_s: float = 0.0
    received_bits: int = 0
    hop_sum: int = 0
    drop_reasons: Counter = field(default_factory=Counter)
    control_overhead: int = 0
    control_by_kind: Counter = field(default_factory=Counter)
    in_flight: int = 0
    per_node_residual: list = field(default_factory=list)

    def record_drop(self, reason: str) -> None:
        if reason not in DROP_REASONS:
            raise ValueError(f"unknown drop reason {reason!r}")
        self.drop_reasons[reason] += 1

    def pdf(self):
        if self.cbr_sent == 0:
            return None
        return 100.0 * self.cbr_received / self.cbr_sent

    def avg_e2e_delay(self):
        if self.cbr_received == 0:
            return None
        return self.delay_sum_s / self.cbr_received

    def throughput(self) -> float:
        if self.sim_time <= 0:
            return 0.0
        return self.received_bits / self.sim_time

    def mrre(self) -> float:
        if not self.per_node_residual:
            return 100.0
        return 100.0 * min(left / initial for initial, left in self.per_node_residual)

    def total_energy(self) -> float:
        return sum(initial - left for initial, left in self.per_node_residual)

    def dropped(self) -> int:
        return sum(self.drop_reasons.values())

    def grouped_drops(self) -> dict:
        return {col: sum(self.drop_reasons[r] for r in reasons)
                for col, reasons in CSV_DROP_GROUPS.items()}


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def csv_row(ledger: MetricsLedger, protocol, propagation, nodes, connections, seed) -> list:
    drops = ledger.grouped_drops()
    values = [
        protocol, propagation, nodes, connections, seed, float(ledger.sim_time),
        ledger.pdf(), ledger.avg_e2e_delay(), ledger.throughput(), ledger.mrre(),
        ledger.total_energy(), ledger.control_overhead, ledger.cbr_sent,
        ledger.cbr_received, drops["drop_collision"], drops["drop_no_route"],
        drops["drop_retry"], drops["drop_queue"],
    ]
    return [fmt(v) for v in values]
