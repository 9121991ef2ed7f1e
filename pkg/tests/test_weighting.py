import random

import pytest

from ttesched.errors import ConfigError
from ttesched.fixtures import get_fixture
from ttesched.model import FlowRequest, SlotConfig
from ttesched.tseg import TX, PathEdge, build_assignment, build_tseg, occupy, release
from ttesched.weighting import (
    WeightConfig,
    check_weight_range,
    edge_weight,
    supported_periods,
    total_weight,
    update_on_occupy,
)


def admit(g, fid, period, tx_hops, max_delay=None):
    """Occupy a hand-built path of transmission hops [(u, v, slot), ...]."""
    path = []
    for u, v, s in tx_hops:
        path.append(PathEdge(TX, u, v, s))
    flow = FlowRequest(fid, 1, tx_hops[0][0], tx_hops[-1][1], period,
                       max_delay or 4 * period)
    a = build_assignment(flow, 1, tuple(path), g.cfg.N)
    occupy(g, a)
    return a


def test_edge_weight_examples():
    assert edge_weight({2, 4}, 4, 2) == 6
    assert edge_weight(set(), 4, 2) == 0
    assert edge_weight({4}, 4, 2) == 2


def test_edge_weight_requires_divisibility():
    with pytest.raises(ConfigError):
        edge_weight({3}, 4, 2)


def test_weight_config_validation():
    with pytest.raises(ConfigError):
        WeightConfig(1)
    check_weight_range(SlotConfig(12, frozenset({5, 10, 20, 40})), WeightConfig(2))
    with pytest.raises(ConfigError):
        check_weight_range(SlotConfig(1, frozenset({1, 64})), WeightConfig(2))


def test_supported_periods_fresh_graph():
    fx = get_fixture("conflict4")
    g = build_tseg(fx.topo, fx.cfg)
    for link in g.links:
        for q in range(1, 5):
            assert supported_periods(g, link, q) == frozenset({2, 4})


def test_supported_periods_after_f1():
    fx = get_fixture("conflict4")
    g = fx.build()
    admit(g, "f1", 2, [("s", "b", 1), ("b", "d", 2)])
    assert supported_periods(g, ("s", "b"), 2) == frozenset({2, 4})
    assert g.edge_state(("s", "b"), 2).supported_periods == frozenset({2, 4})


def test_supported_periods_after_wop_style_f2():
    fx = get_fixture("conflict4")
    g = fx.build()
    admit(g, "f1", 2, [("s", "b", 1), ("b", "d", 2)])
    admit(g, "f2", 4, [("s", "b", 2), ("b", "d", 3)], max_delay=8)
    assert supported_periods(g, ("s", "b"), 4) == frozenset({4})
    assert g.edge_state(("s", "b"), 4).supported_periods == frozenset({4})
    assert g.edge_state(("s", "b"), 4).weight == 2


def test_occupied_copy_has_empty_support_and_zero_weight():
    fx = get_fixture("conflict4")
    g = fx.build()
    admit(g, "f1", 2, [("s", "b", 1), ("b", "d", 2)])
    assert supported_periods(g, ("s", "b"), 1) == frozenset()
    st = g.edge_state(("s", "b"), 1)
    assert st.supported_periods == frozenset() and st.weight == 0


def test_update_on_occupy_f1_keeps_partner_weights():
    fx = get_fixture("conflict4")
    g = fx.build()
    admit(g, "f1", 2, [("s", "b", 1), ("b", "d", 2)])
    # the surviving period-2 partners of the removed copies are each other
    assert g.edge_state(("s", "b"), 2).weight == 6
    assert g.edge_state(("s", "b"), 4).weight == 6
    assert g.edge_state(("b", "d"), 1).weight == 6
    assert g.edge_state(("b", "d"), 3).weight == 6


def test_update_on_occupy_then_single_copy():
    fx = get_fixture("conflict4")
    g = fx.build()
    admit(g, "f1", 2, [("s", "b", 1), ("b", "d", 2)])
    admit(g, "f2", 4, [("s", "b", 2)])  # one frame on (s,b)@2 only
    st = g.edge_state(("s", "b"), 4)
    assert st.supported_periods == frozenset({4})
    assert st.weight == 2


def test_update_on_occupy_empty_support_changes_nothing():
    # periods {2,3}, N=6: blocking @3 and @4 kills both classes of slot 1,
    # leaving a free copy that supports nothing
    from ttesched.model import SWITCH, Node, Topology

    topo = Topology((Node("u", SWITCH), Node("v", SWITCH)), (("u", "v"),))
    cfg = SlotConfig(12, frozenset({2, 3}))
    g = build_tseg(topo, cfg, blocked=[(("u", "v"), 3), (("u", "v"), 4)])
    assert g.edge_state(("u", "v"), 1).supported_periods == frozenset()
    before = {q: g.edge_state(("u", "v"), q) for q in range(2, 7)}
    g._occupant[0][1] = "fX"
    changed = update_on_occupy(g, [(("u", "v"), 1)])
    assert changed == ()
    assert {q: g.edge_state(("u", "v"), q) for q in range(2, 7)} == before


def test_update_report_lists_touched_copies():
    fx = get_fixture("conflict4")
    g = fx.build()
    admit(g, "f1", 2, [("s", "b", 1), ("b", "d", 2)])
    release(g, "f1")
    g._occupant[g.link_idx[("s", "b")]][1] = "f1"
    g._occupant[g.link_idx[("s", "b")]][3] = "f1"
    changed = update_on_occupy(g, [(("s", "b"), 1), (("s", "b"), 3)])
    # the removed copies were each other's period-2 partners; the surviving
    # class {2,4} is intact, so no third copy is touched
    assert changed == ()


def test_total_weight_fresh_uniform():
    fx = get_fixture("conflict4")
    g = build_tseg(fx.topo, fx.cfg)  # 4 links, N=4, all free
    assert total_weight(g) == 16 * 6


def test_total_weight_strictly_decreases_per_admission():
    fx = get_fixture("conflict4")
    g = fx.build()
    w0 = total_weight(g)
    admit(g, "f1", 2, [("s", "b", 1), ("b", "d", 2)])
    w1 = total_weight(g)
    admit(g, "f2", 4, [("s", "a", 2), ("a", "d", 4)], max_delay=8)
    w2 = total_weight(g)
    assert w0 > w1 > w2


def test_total_weight_restored_after_release():
    fx = get_fixture("conflict4")
    g = fx.build()
    w0 = total_weight(g)
    admit(g, "f1", 2, [("s", "b", 1), ("b", "d", 2)])
    release(g, "f1")
    assert total_weight(g) == w0


def test_incremental_state_matches_scan_after_random_ops():
    fx = get_fixture("conflict4")
    g = fx.build()
    rng = random.Random(11)
    live = []
    for step in range(60):
        if live and rng.random() < 0.4:
            fid = live.pop(rng.randrange(len(live)))
            release(g, fid)
        else:
            link = g.links[rng.randrange(len(g.links))]
            p = rng.choice([2, 4])
            free = [
                q
                for q in range(1, 5)
                if g.occupant_of(link, q) is None
                and p in g.edge_state(link, q).supported_periods
            ]
            if not free:
                continue
            fid = f"r{step}"
            admit(g, fid, p, [(link[0], link[1], rng.choice(free))])
            live.append(fid)
        for link in g.links:
            for q in range(1, 5):
                st = g.edge_state(link, q)
                assert st.supported_periods == supported_periods(g, link, q)
                assert st.weight == edge_weight(
                    st.supported_periods, g.cfg.N, g.weight_cfg.alpha_base
                )


def test_dominance_superset_weighs_more():
    rng = random.Random(5)
    periods = [1, 2, 4, 8]
    for _ in range(100):
        a = set(rng.sample(periods, rng.randint(1, 4)))
        b = set(s for s in a if rng.random() < 0.7)
        if b == a:
            continue
        assert edge_weight(a, 8, 2) > edge_weight(b, 8, 2)
