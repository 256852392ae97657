import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from manetsim.packet import Kind, Packet
from manetsim.routing import INFINITY, Action
from oracle import bfs, check_graph, is_connected, static_network

CHAIN = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=bool)


def data(src, dst, t=0.0):
    return Packet(Kind.DATA, src, dst, 540, t)


def record_deliveries(net):
    got = []
    original = net.deliver_local

    def deliver(node, pkt):
        got.append((node, pkt.uid))
        original(node, pkt)

    net.deliver_local = deliver
    return got


def rreqs(net):
    return net.ledger.control_by_kind["rreq"]


@pytest.mark.parametrize("protocol", ["aodv", "dsr", "dsdv"])
def test_lookup_self(protocol):
    net = static_network(protocol, CHAIN)
    assert net.routers[1].route_lookup(1).action is Action.DELIVER


def test_aodv_chain_discovery():
    net = static_network("aodv", CHAIN)
    got = record_deliveries(net)
    pkt = data(0, 2)
    net.routers[0].originate(pkt)
    net.sim.run_until(1.0)
    e = net.routers[0].table[2]
    assert (e.next_hop, e.hop_count) == (1, 2)
    assert net.routers[0].route_lookup(2) == (Action.FORWARD, 1, None)
    assert (2, pkt.uid) in got


def test_aodv_no_route_buffers_and_discovers():
    net = static_network("aodv", CHAIN)
    net.routers[0].originate(data(0, 2))
    r = net.routers[0]
    assert r.buffer.has(2) and 2 in r.pending
    assert r.route_lookup(2).action is Action.DISCOVER
    assert rreqs(net) == 1


def test_aodv_stale_rrep_ignored():
    net = static_network("aodv", CHAIN)
    r = net.routers[0]
    r._update_route(2, 1, 2, 10, 10.0)
    before = vars(r.table[2]).copy()
    rrep = Packet(Kind.RREP, 2, 0, 40, 0.0, target=2, dest_seq=5, hop_count=0)
    r.receive(rrep, 1)
    assert r.table[2].dest_seq == 10
    assert {k: v for k, v in vars(r.table[2]).items() if k != "precursors"} == \
        {k: v for k, v in before.items() if k != "precursors"}
    assert r.stale_rreps == 1


def test_aodv_duplicate_rreq_not_rebroadcast():
    net = static_network("aodv", CHAIN)
    r = net.routers[1]
    # nobody knows node 9, so the only possible reaction is a rebroadcast
    rreq = Packet(Kind.RREQ, 0, -1, 44, 0.0, origin=0, target=9, rreq_id=1, orig_seq=1,
                  dest_seq=None, hop_count=0)
    r.receive(rreq, 0)
    assert rreqs(net) == 1
    r.receive(rreq, 0)
    assert rreqs(net) == 1


def test_dsr_chain_discovery_and_cache_hit():
    net = static_network("dsr", CHAIN)
    got = record_deliveries(net)
    first = data(0, 2)
    net.routers[0].originate(first)
    net.sim.run_until(1.0)
    assert net.routers[0].best_route(2) == (0, 1, 2)
    assert net.routers[0].route_lookup(2).route == (0, 1, 2)
    assert (2, first.uid) in got
    n = rreqs(net)
    second = data(0, 2, 1.0)
    net.routers[0].originate(second)
    net.sim.run_until(2.0)
    assert rreqs(net) == n
    assert (2, second.uid) in got


def test_dsr_rreq_loop_discarded():
    net = static_network("dsr", CHAIN)
    rreq = Packet(Kind.RREQ, 0, 2, 40, 0.0, origin=0, target=2, rreq_id=1, route=(0, 1, 2))
    net.routers[1].receive(rreq, 2)
    assert rreqs(net) == 0
    assert net.ledger.control_overhead == 0


def test_network_copies_link_matrix():
    net = static_network("dsr", CHAIN)
    net.link_matrix[0, 1] = False
    assert CHAIN[0, 1]


def test_dsr_link_kill_rerr_purge_rediscover():
    net = static_network("dsr", CHAIN)
    got = record_deliveries(net)
    net.routers[0].originate(data(0, 2))
    net.sim.run_until(1.0)
    assert got
    net.link_matrix[1, 2] = net.link_matrix[2, 1] = False
    net.routers[0].originate(data(0, 2, 1.0))
    net.sim.run_until(2.0)
    assert net.ledger.control_by_kind["rerr"] >= 1
    assert all(not {1, 2} <= set(p) or abs(p.index(1) - p.index(2)) != 1
               for p in net.routers[0].cache)
    n = rreqs(net)
    net.routers[0].originate(data(0, 2, 2.0))
    assert rreqs(net) == n + 1


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_dsdv_chain_converges(seed):
    net = static_network("dsdv", CHAIN, seed=seed)
    net.sim.run_until(2 * net.cfg.dump_interval)
    e = net.routers[0].table[2]
    assert (e.next_hop, e.hop_count) == (1, 2)
    assert net.routers[0].route_lookup(2) == (Action.FORWARD, 1, None)


def test_dsdv_equal_seq_longer_rejected():
    net = static_network("dsdv", CHAIN)
    r = net.routers[0]
    r.receive(Packet(Kind.DSDV_UPDATE, 1, -1, 36, 0.0, entries=((2, 1, 4),)), 1)
    assert (r.table[2].hop_count, r.table[2].dest_seq) == (2, 4)
    r.receive(Packet(Kind.DSDV_UPDATE, 3, -1, 36, 0.0, entries=((2, 2, 4),)), 1)
    assert (r.table[2].hop_count, r.table[2].dest_seq) == (2, 4)


def test_dsdv_break_then_restore():
    net = static_network("dsdv", CHAIN)
    dump = net.cfg.dump_interval
    net.sim.run_until(3 * dump)
    net.link_matrix[1, 2] = net.link_matrix[2, 1] = False
    net.routers[0].originate(data(0, 2, net.sim.now))
    net.sim.run_until(net.sim.now + 1.0)
    e = net.routers[0].table[2]
    assert e.hop_count == INFINITY and e.dest_seq % 2 == 1
    net.link_matrix[1, 2] = net.link_matrix[2, 1] = True
    net.sim.run_until(net.sim.now + 2 * dump)
    e = net.routers[0].table[2]
    assert e.hop_count == 2 and e.dest_seq % 2 == 0


def test_own_sequence_numbers_even_and_increasing():
    net = static_network("dsdv", CHAIN)
    seen = []
    for k in range(1, 6):
        net.sim.run_until(k * net.cfg.dump_interval)
        seen.append(net.routers[1].seq)
    assert all(s % 2 == 0 for s in seen)
    assert seen == sorted(seen) and seen[-1] > seen[0]


@st.composite
def connected_graph(draw, max_nodes=6):
    n = draw(st.integers(2, max_nodes))
    bits = draw(st.lists(st.booleans(), min_size=n * (n - 1) // 2,
                         max_size=n * (n - 1) // 2))
    adj = np.zeros((n, n), dtype=bool)
    it = iter(bits)
    for a in range(n):
        for b in range(a + 1, n):
            adj[a, b] = adj[b, a] = next(it)
    # chain the components so the graph is connected
    for a in range(n - 1):
        if not is_connected(adj) and len(bfs(adj, a)) < n and a + 1 not in bfs(adj, a):
            adj[a, a + 1] = adj[a + 1, a] = True
    return adj


@settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(connected_graph())
def test_dsdv_converges_to_shortest_paths(adj):
    assert is_connected(adj)
    assert check_graph("dsdv", adj) == []


@settings(max_examples=15, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(connected_graph(max_nodes=5))
def test_aodv_routes_loop_free_and_shortest(adj):
    assert check_graph("aodv", adj, settle=4.0, capture_db=0.0) == []


@settings(max_examples=15, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(connected_graph(max_nodes=5))
def test_dsr_caches_hold_only_real_paths(adj):
    net = static_network("dsr", adj, capture_db=0.0)
    n = len(adj)
    t = 1.0
    for s in range(n):
        for d in range(n):
            if s != d:
                net.routers[s].originate(data(s, d, t))
                t += 0.5
                net.sim.run_until(t)
    for router in net.routers:
        for path in router.cache:
            assert path[0] == router.node and len(set(path)) == len(path)
            assert all(adj[a, b] for a, b in zip(path, path[1:]))


def test_aodv_sequence_numbers_never_decrease():
    from manetsim.config import ScenarioConfig
    from manetsim.network import Network
    net = Network(ScenarioConfig(nodes=15, width=500, height=500, sim_time=40,
                                 connections=4, v_max=10, seed=5))
    last = {}

    def sample():
        for r in net.routers:
            for dest, e in r.table.items():
                key = (r.node, dest)
                assert e.dest_seq >= last.get(key, 0)
                last[key] = e.dest_seq
        if net.sim.now + 0.25 < 40:
            net.sim.after(0.25, sample)

    net.sim.schedule(0.0, sample)
    net.run()
    assert last
