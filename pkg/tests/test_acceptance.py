"""Acceptance criteria, one verdict line each.

Run under pytest (the lines appear in the terminal summary) or directly with
``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import math
import sys
import time
from decimal import Decimal, getcontext
from functools import lru_cache
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

import directional  # noqa: E402
from acceptance_log import VERDICTS, record  # noqa: E402
from oracle import check_graph, connected_graphs  # noqa: E402

from manetsim import Network, ScenarioConfig, run_scenario  # noqa: E402
from manetsim.energy import EnergyModel  # noqa: E402
from manetsim.kernel import stream  # noqa: E402
from manetsim.mobility import RandomWaypoint  # noqa: E402
from manetsim.propagation import (MODELS, FadingSpec, Model, RadioParams,  # noqa: E402
                                  crossover_distance, envelope_pdf, fading_gain,
                                  friis_power, two_ray_power)
from manetsim.scenario import Grid, csv_text, sweep  # noqa: E402

DESK = ScenarioConfig(nodes=25, width=400, height=400, sim_time=60)
DESK_GRID = Grid(("aodv", "dsr", "dsdv"), MODELS, (2, 4, 6, 8), tuple(range(1, 11)))
SWEEP_108 = Grid(("aodv", "dsr", "dsdv"), MODELS, (2, 4, 6, 8, 10, 12), (1,))


# 1 -------------------------------------------------------------------------

def _hand_friis(pt, gt, gr, lam, d, loss):
    pi = Decimal("3.14159265358979323846264338327950288")
    return Decimal(pt) * Decimal(gt) * Decimal(gr) * Decimal(lam) ** 2 / (
        (4 * pi) ** 2 * Decimal(d) ** 2 * Decimal(loss))


def _hand_two_ray(pt, gt, gr, ht, hr, d, loss):
    return (Decimal(pt) * Decimal(gt) * Decimal(gr) * Decimal(ht) ** 2 * Decimal(hr) ** 2
            / (Decimal(d) ** 4 * Decimal(loss)))


def check_path_loss():
    getcontext().prec = 40
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(20):
        pt, gt, gr = rng.uniform(0.01, 2), rng.uniform(0.5, 4), rng.uniform(0.5, 4)
        loss, lam = rng.uniform(1, 3), rng.uniform(0.05, 1.5)
        ht, hr = rng.uniform(0.5, 10), rng.uniform(0.5, 10)
        rp = RadioParams(pt=pt, gt=gt, gr=gr, loss=loss, wavelength=lam, ht=ht, hr=hr)
        dc = crossover_distance(rp)
        for d in (0.5 * dc, dc * 0.999, 2 * dc, 10 * dc, 250.0):
            hand = _hand_friis(pt, gt, gr, lam, d, loss)
            worst = max(worst, abs(Decimal(friis_power(rp, d)) - hand) / hand)
            want = hand if d < dc else _hand_two_ray(pt, gt, gr, ht, hr, d, loss)
            worst = max(worst, abs(Decimal(two_ray_power(rp, d)) - want) / want)
        near = friis_power(rp, dc)
        far = float(_hand_two_ray(pt, gt, gr, ht, hr, dc, loss))
        worst = max(worst, abs(Decimal(two_ray_power(rp, dc)) - Decimal(near)) / Decimal(near),
                    Decimal(abs(far - near) / near))
    elapsed = time.perf_counter() - t0
    ok = worst < Decimal("1e-9") and elapsed < 1.0
    return ok, f"20 parameter sets, max relative error {float(worst):.2e}, {elapsed:.2f} s"


# 2 -------------------------------------------------------------------------

PRESETS = ([FadingSpec(Model.RAYLEIGH)]
           + [FadingSpec(Model.RICE, k=k) for k in (0, 1, 5, 10)]
           + [FadingSpec(Model.NAKAGAMI, m=m) for m in (0.5, 1, 2, 4)])


def check_distributions():
    from scipy import stats
    from scipy.integrate import cumulative_trapezoid, quad
    t0 = time.perf_counter()
    worst_norm, worst_p = 0.0, 1.0
    for i, spec in enumerate(PRESETS):
        total, _ = quad(lambda s: float(envelope_pdf(spec, s)), 0, 20.0, limit=400,
                        points=[0.5, 1.0, 1.5], epsabs=1e-12, epsrel=1e-12)
        worst_norm = max(worst_norm, abs(total - 1))
        env = np.sqrt(fading_gain(spec, stream("acceptance-ks", i), 100_000))
        grid = np.linspace(0, env.max() * 1.01, 20_001)
        cdf = cumulative_trapezoid(envelope_pdf(spec, grid), grid, initial=0.0)
        worst_p = min(worst_p, stats.kstest(env, lambda x: np.interp(x, grid, cdf)).pvalue)
    x = np.linspace(0, 6, 2001)
    ray = envelope_pdf(FadingSpec(Model.RAYLEIGH), x)
    reduction = max(np.max(np.abs(envelope_pdf(FadingSpec(Model.RICE, k=0), x) - ray)),
                    np.max(np.abs(envelope_pdf(FadingSpec(Model.NAKAGAMI, m=1), x) - ray)))
    elapsed = time.perf_counter() - t0
    ok = worst_norm <= 1e-6 and worst_p > 0.01 and reduction <= 1e-9 and elapsed < 30
    return ok, (f"{len(PRESETS)} densities, max |integral-1| {worst_norm:.1e}, "
                f"min KS p {worst_p:.3f}, reduction gap {reduction:.1e}, {elapsed:.1f} s")


# 3 -------------------------------------------------------------------------

# On an ideal channel (capture at 0 dB) overlapping copies of a flood still
# decode, so the check is about routing logic, not hidden-terminal luck.
ORACLE_SETTLE = {"aodv": 4.0, "dsr": 1.0, "dsdv": None}


def check_oracle():
    t0 = time.perf_counter()
    # a single node has no pairs to route, so enumeration starts at two
    graphs = [adj for n in range(2, 6) for adj in connected_graphs(n)]
    failures = {}
    for protocol, settle in ORACLE_SETTLE.items():
        failures[protocol] = sum(bool(check_graph(protocol, adj, settle=settle,
                                                  capture_db=0.0)) for adj in graphs)
    elapsed = time.perf_counter() - t0
    ok = not any(failures.values()) and elapsed < 120
    shown = ", ".join(f"{p} {f} failing" for p, f in failures.items())
    return ok, f"{len(graphs)} connected graphs with 2 <= N <= 5: {shown}, {elapsed:.0f} s"


# 4 and 5 ---------------------------------------------------------------------

@lru_cache(maxsize=None)
def desk_grid():
    t0 = time.perf_counter()
    rows, errors = sweep(DESK, DESK_GRID)
    return rows, errors, time.perf_counter() - t0


def check_determinism():
    t0 = time.perf_counter()
    cfg = DESK.replace(protocol="dsr", propagation="rice", connections=6, seed=3)
    twice = run_scenario(cfg).row == run_scenario(cfg).row
    serial, e1 = sweep(DESK, SWEEP_108, jobs=1)
    parallel, e8 = sweep(DESK, SWEEP_108, jobs=8)
    same = csv_text(serial) == csv_text(parallel)
    elapsed = time.perf_counter() - t0
    ok = twice and same and not e1 and not e8 and len(serial) == 108 and elapsed < 300
    return ok, (f"repeat run identical: {twice}; 108-cell sweep jobs 8 == jobs 1: {same}; "
                f"{elapsed:.0f} s")


DIRECTIONAL = (
    ("i", "PDF non-increasing with load", directional.check_pdf_trend),
    ("ii", "deterministic PDF >= fading PDF - 2", directional.check_deterministic_beats_fading),
    ("iii", "AODV/DSR PDF >= 95 at lowest load", directional.check_low_load_pdf),
    ("iv", "shadowing delay >= freespace delay", directional.check_shadowing_delay),
    ("v", "DSDV energy <= AODV and DSR", directional.check_dsdv_energy),
)


def check_directional():
    rows, errors, elapsed = desk_grid()
    text = csv_text(rows)
    parsed = directional.load_rows(text)
    parts, ok = [], not errors and elapsed < 600
    failing = {}
    for tag, _, fn in DIRECTIONAL:
        verdicts, values = fn(parsed)
        bad = [k for k, v in verdicts.items() if not v]
        failing[tag] = {k: values[k] for k in bad}
        ok = ok and not bad
        parts.append(f"({tag}) {len(verdicts) - len(bad)}/{len(verdicts)}")
    detail = f"{len(rows)} runs in {elapsed:.0f} s; " + " ".join(parts)
    return ok, detail, failing


# 6 and 7 ---------------------------------------------------------------------

def check_energy_ledger():
    exact = (EnergyModel(1).debit_tx(0, 4096) == pytest.approx(1.35168e-3, rel=1e-15)
             and EnergyModel(1).debit_rx(0, 4096) == pytest.approx(8.0896e-4, rel=1e-15))
    net = Network(DESK.replace(connections=8, seed=2))
    energy = net.energy
    debits = []
    for name in ("debit_tx", "debit_rx", "debit_rx_many"):
        inner = getattr(energy, name)

        def wrapped(*args, _inner=inner):
            joules = _inner(*args)
            debits.append(joules)
            return joules
        setattr(energy, name, wrapped)
    net.run()
    consumed = sum(energy.total_consumed(i) for i in range(energy.n))
    gap = abs(consumed - math.fsum(debits))
    ok = exact and energy.floor_events == 0 and gap <= 1e-9
    return ok, (f"hand charges within 1e-15: {exact}; |sum consumed - sum debits| = {gap:.1e} J "
                f"over {len(debits)} debits, floor events {energy.floor_events}")


def check_waypoints():
    t0 = time.perf_counter()
    rw = RandomWaypoint(1, 670, 670, 1.0, positions=[(0, 0)], static=True)
    pts = rw.sample_waypoints(stream("mobility", 1), 1_000_000)
    inside = bool(np.all((pts >= 0) & (pts <= 670)))
    dev = np.abs(pts.mean(axis=0) - 335.0) / 335.0
    elapsed = time.perf_counter() - t0
    ok = inside and bool(np.all(dev < 0.01)) and elapsed < 5
    return ok, (f"10^6 waypoints inside field: {inside}; axis mean offsets "
                f"{dev[0]:.2e}, {dev[1]:.2e}; {elapsed:.2f} s")


# pytest ----------------------------------------------------------------------

def test_criterion_1_path_loss():
    ok, detail = check_path_loss()
    assert record(1, ok, detail), detail


def test_criterion_2_distributions():
    ok, detail = check_distributions()
    assert record(2, ok, detail), detail


def test_criterion_3_oracle_equivalence():
    ok, detail = check_oracle()
    assert record(3, ok, detail), detail


def test_criterion_4_determinism():
    ok, detail = check_determinism()
    assert record(4, ok, detail), detail


def test_criterion_5_directional():
    ok, detail, failing = check_directional()
    record(5, ok, detail)
    assert ok, {k: v for k, v in failing.items() if v}


def test_criterion_6_energy_ledger():
    ok, detail = check_energy_ledger()
    assert record(6, ok, detail), detail


def test_criterion_7_waypoints():
    ok, detail = check_waypoints()
    assert record(7, ok, detail), detail


if __name__ == "__main__":
    checks = [check_path_loss, check_distributions, check_oracle, check_determinism,
              check_directional, check_energy_ledger, check_waypoints]
    for number, check in enumerate(checks, start=1):
        result = check()
        record(number, result[0], result[1])
        print(VERDICTS[number], flush=True)
