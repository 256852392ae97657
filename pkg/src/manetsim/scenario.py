"""Running one scenario and sweeping a grid of them."""

from __future__ import annotations

import csv
import io
import itertools
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .config import ScenarioConfig
from .metrics import CSV_COLUMNS, MetricsLedger, csv_row
from .network import Network


@dataclass
class RunResult:
    ledger: MetricsLedger
    row: list
    network: Network


def run_scenario(cfg: ScenarioConfig, positions=None, link_matrix=None, trace=False):
    """Build and run one scenario; returns the ledger, its CSV row and the network."""
    net = Network(cfg, positions=positions, link_matrix=link_matrix, trace=trace)
    ledger = net.run()
    row = csv_row(ledger, cfg.protocol, cfg.propagation, cfg.nodes, cfg.connections, cfg.seed)
    return RunResult(ledger, row, net)


@dataclass(frozen=True)
class Grid:
    protocols: tuple
    models: tuple
    connections: tuple
    seeds: tuple

    def __post_init__(self):
        for name in ("protocols", "models", "connections", "seeds"):
            if not getattr(self, name):
                raise ValueError(f"sweep axis {name} is empty")

    def cells(self):
        return list(itertools.product(self.protocols, self.models, self.connections,
                                      self.seeds))


def _run_cell(base: ScenarioConfig, cell):
    protocol, model, conns, seed = cell
    try:
        cfg = base.replace(protocol=protocol, propagation=model, connections=conns,
                           seed=seed)
        return run_scenario(cfg).row, None
    except Exception as exc:  # a failed cell must not sink the sweep
        return error_row(base, cell), f"{type(exc).__name__}: {exc}"


def error_row(base: ScenarioConfig, cell) -> list:
    protocol, model, conns, seed = cell
    row = [protocol, model, str(base.nodes), str(conns), str(seed), "ERROR"]
    return row + [""] * (len(CSV_COLUMNS) - len(row))


def sweep(base: ScenarioConfig, grid: Grid, jobs: int = 1):
    """Run every cell of ``grid``; rows come back in grid order.

    Returns ``(rows, errors)`` where ``errors`` maps cell index to message.
    """
    cells = grid.cells()
    if jobs <= 1:
        results = [_run_cell(base, c) for c in cells]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_cell, itertools.repeat(base), cells))
    rows = [r for r, _ in results]
    errors = {i: e for i, (_, e) in enumerate(results) if e is not None}
    return rows, errors


def csv_text(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    writer.writerows(rows)
    return buf.getvalue()


GNUPLOT_FIELDS = ("pdf_percent", "avg_e2e_delay_s", "throughput_bps", "mrre_percent",
                  "total_energy_j")


def gnuplot_text(rows) -> str:
    """Seed-averaged metrics, one blank-line-separated block per protocol and model.

    Each block is addressable with gnuplot's ``index``; a missing value
    (no packets received in any seed) is written as ``NaN``.
    """
    col = {name: i for i, name in enumerate(CSV_COLUMNS)}
    groups: dict = defaultdict(lambda: defaultdict(list))
    order = []
    for row in rows:
        if row[col["sim_time_s"]] == "ERROR":
            continue
        key = (row[col["protocol"]], row[col["propagation"]])
        if key not in groups:
            order.append(key)
        groups[key][int(row[col["connections"]])].append(row)
    blocks = []
    for protocol, model in order:
        lines = [f"# {protocol} {model}", "# connections " + " ".join(GNUPLOT_FIELDS)]
        for conns in sorted(groups[(protocol, model)]):
            members = groups[(protocol, model)][conns]
            values = []
            for name in GNUPLOT_FIELDS:
                xs = [float(r[col[name]]) for r in members if r[col[name]] != ""]
                values.append(f"{sum(xs) / len(xs):.6f}" if xs else "NaN")
            lines.append(f"{conns} " + " ".join(values))
        blocks.append("\n".join(lines))
    return "\n\n\n".join(blocks) + ("\n" if blocks else "")
