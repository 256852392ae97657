import math

from hypothesis import given, settings
from hypothesis import strategies as st

from manetsim.kernel import Simulator, stream
from manetsim.metrics import MetricsLedger
from manetsim.packet import Kind
from manetsim.traffic import CbrSource, Connection, Sink, build_connections, cbr_tick


def pairs(n, nodes=50, seed=1):
    return build_connections(n, nodes, stream("traffic", seed), 200.0)


def test_five_pairs():
    conns = pairs(5)
    assert len(conns) == 5
    assert len({(c.src, c.dst) for c in conns}) == 5
    assert all(c.src != c.dst for c in conns)


def test_thirty_pairs():
    assert len(pairs(30)) == 30


def test_pairs_reproducible_and_nested():
    assert pairs(10, seed=4) == pairs(10, seed=4)
    assert pairs(30, seed=4)[:10] == pairs(10, seed=4)


def test_starts_within_window():
    assert all(0 <= c.start < 10 and c.stop == 200.0 for c in pairs(30))


def run_source(conn):
    sim = Simulator()
    out = []
    CbrSource(conn, sim, out.append).start()
    sim.run_until(conn.stop + 1)
    return out


def test_ten_second_window():
    conn = Connection(0, 1, 2, 3.0, 13.0)
    pkts = run_source(conn)
    assert len(pkts) == 80
    assert [p.seq for p in pkts] == list(range(80))
    assert [p.created for p in pkts] == [3.0 + k / 8 for k in range(80)]
    assert all(p.kind is Kind.DATA and p.size == 512 + 28 for p in pkts)


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 50), st.floats(0.01, 60))
def test_sent_count_invariant(start, span):
    conn = Connection(0, 0, 1, start, start + span)
    assert len(run_source(conn)) == math.ceil((conn.stop - conn.start) * 8)


def test_sink_dedup():
    conn = Connection(3, 0, 1, 0.0, 10.0)
    ledger = MetricsLedger(sim_time=10.0)
    sink = Sink(conn, ledger)
    pkt = cbr_tick(conn, 7, 1.0)
    assert sink.sink_receive(pkt, 1.5)
    assert ledger.cbr_received == 1
    assert not sink.sink_receive(pkt, 1.7)
    assert ledger.cbr_received == 1 and ledger.duplicates == 1
    assert ledger.delay_sum_s == 0.5


def test_sink_ignores_other_connection():
    ledger = MetricsLedger()
    sink = Sink(Connection(0, 0, 1, 0.0, 10.0), ledger)
    assert not sink.sink_receive(cbr_tick(Connection(1, 2, 1, 0.0, 10.0), 0, 0.0), 1.0)
    assert ledger.cbr_received == 0
