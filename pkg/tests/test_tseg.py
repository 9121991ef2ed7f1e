import pytest

from ttesched.errors import ConfigError, ConflictError, UnknownFlowError
from ttesched.fixtures import get_fixture
from ttesched.model import FlowRequest, SlotConfig, build_ring
from ttesched.tseg import (
    TX,
    PathEdge,
    build_assignment,
    build_tseg,
    export_gate_table,
    occupy,
    parse_gate_table,
    path_delay,
    release,
    replica_slots,
)


def snapshot(g):
    """Full observable state: occupants, supported sets, weights."""
    N = g.cfg.N
    return tuple(
        (
            link,
            tuple(g._occupant[li][q] for q in range(1, N + 1)),
            tuple(frozenset(g._support[li][q]) for q in range(1, N + 1)),
            tuple(g._weight[li][q] for q in range(1, N + 1)),
        )
        for li, link in enumerate(g.links)
    )


def f1_assignment(fx):
    path = (
        PathEdge(TX, "s", "b", 1),
        PathEdge("cache", "b", "b", 1),
        PathEdge(TX, "b", "d", 2),
    )
    return build_assignment(fx.flows[0], 1, path, fx.cfg.N)


def test_build_counts_small():
    fx = get_fixture("conflict4")
    g = build_tseg(fx.topo, fx.cfg)  # no background
    assert g.n_vertices == 16
    assert g.free_transmission_copies() == 16
    assert g.caching_edge_count == 12
    assert g.inter_hyper_edge_count == 4


def test_build_counts_ring12():
    cfg = SlotConfig(12, frozenset({5, 10, 20, 40}))
    g = build_tseg(build_ring(12), cfg)
    assert g.n_vertices == 480
    assert g.free_transmission_copies() == 960


def test_build_fresh_supports_full_period_set():
    fx = get_fixture("conflict4")
    g = build_tseg(fx.topo, fx.cfg)
    for (link, q), st in g.transmission_edges().items():
        assert st.supported_periods == frozenset({2, 4})
        assert st.weight == 6


def test_empty_period_set_rejected_upstream():
    with pytest.raises(ConfigError):
        SlotConfig(12, frozenset())


def test_replica_slots():
    assert set(replica_slots(3, 4, 8)) == {3, 7}
    assert set(replica_slots(1, 1, 4)) == {1, 2, 3, 4}
    assert set(replica_slots(2, 40, 40)) == {2}


def test_replica_slots_validation():
    with pytest.raises(ConfigError):
        replica_slots(9, 4, 8)
    with pytest.raises(ConfigError):
        replica_slots(1, 3, 8)


def test_occupy_removes_replicas():
    fx = get_fixture("conflict4")
    g = fx.build()
    report = occupy(g, f1_assignment(fx))
    assert set(report.removed) == {
        (("s", "b"), 1),
        (("s", "b"), 3),
        (("b", "d"), 2),
        (("b", "d"), 4),
    }
    assert g.occupant_of(("s", "b"), 1) == "f1"
    assert g.occupant_of(("s", "b"), 2) is None


def test_occupy_conflict_is_atomic():
    fx = get_fixture("conflict4")
    g = fx.build()
    occupy(g, f1_assignment(fx))
    before = snapshot(g)
    clashing = build_assignment(
        FlowRequest("fX", 5, "s", "d", 4, 8),
        1,
        (PathEdge(TX, "s", "b", 1),),
        fx.cfg.N,
    )
    with pytest.raises(ConflictError):
        occupy(g, clashing)
    assert snapshot(g) == before
    assert "fX" not in g.admitted


def test_occupy_release_round_trip():
    fx = get_fixture("conflict4")
    g = fx.build()
    before = snapshot(g)
    occupy(g, f1_assignment(fx))
    assert snapshot(g) != before
    release(g, "f1")
    assert snapshot(g) == before
    assert g.admitted == {}


def test_release_restores_supported_periods():
    fx = get_fixture("conflict4")
    g = fx.build()
    occupy(g, f1_assignment(fx))
    release(g, "f1")
    assert g.edge_state(("s", "b"), 1).supported_periods == frozenset({2, 4})
    assert g.edge_state(("s", "b"), 3).supported_periods == frozenset({2, 4})


def test_release_unknown_flow():
    fx = get_fixture("conflict4")
    g = fx.build()
    with pytest.raises(UnknownFlowError):
        release(g, "f1")


def test_occupy_two_release_first_equals_only_second():
    fx = get_fixture("conflict4")
    g = fx.build()
    occupy(g, f1_assignment(fx))
    # f2 on the a-route, one frame per hyper-period
    path2 = (
        PathEdge(TX, "s", "a", 2),
        PathEdge("cache", "a", "a", 2),
        PathEdge("cache", "a", "a", 3),
        PathEdge(TX, "a", "d", 4),
    )
    a2 = build_assignment(fx.flows[1], 2, path2, fx.cfg.N)
    occupy(g, a2)
    release(g, "f1")

    g2 = fx.build()
    occupy(g2, a2)
    assert snapshot(g) == snapshot(g2)


def test_gate_table_empty():
    fx = get_fixture("conflict4")
    g = fx.build()
    assert export_gate_table(g, []) == "link_src,link_dst,slot,flow_id\n"


def test_gate_table_after_f1():
    fx = get_fixture("conflict4")
    g = fx.build()
    a = f1_assignment(fx)
    occupy(g, a)
    text = export_gate_table(g, [a])
    lines = text.strip().splitlines()
    assert lines[0] == "link_src,link_dst,slot,flow_id"
    assert len(lines) - 1 == 4  # (N/p) * path tx edges = 2 * 2
    assert lines[1:] == sorted(lines[1:])


def test_gate_table_row_count_formula():
    fx = get_fixture("conflict4")
    g = fx.build()
    a1 = f1_assignment(fx)
    occupy(g, a1)
    path2 = (
        PathEdge(TX, "s", "a", 2),
        PathEdge("cache", "a", "a", 2),
        PathEdge("cache", "a", "a", 3),
        PathEdge(TX, "a", "d", 4),
    )
    a2 = build_assignment(fx.flows[1], 2, path2, fx.cfg.N)
    occupy(g, a2)
    rows = export_gate_table(g, [a1, a2]).strip().splitlines()[1:]
    expected = sum(
        (fx.cfg.N // a.flow.period_slots) * len(a.tx_edges) for a in (a1, a2)
    )
    assert len(rows) == expected


def test_gate_table_parse_round_trip():
    fx = get_fixture("conflict4")
    g = fx.build()
    a = f1_assignment(fx)
    occupy(g, a)
    rows = parse_gate_table(export_gate_table(g, [a]))
    assert set(rows) == {
        ("s", "b", 1, "f1"),
        ("s", "b", 3, "f1"),
        ("b", "d", 2, "f1"),
        ("b", "d", 4, "f1"),
    }


def test_path_delay():
    assert path_delay((PathEdge(TX, "s", "d", 1),)) == 1
    p = (
        PathEdge("cache", "s", "s", 1),
        PathEdge(TX, "s", "a", 2),
        PathEdge("cache", "a", "a", 2),
        PathEdge(TX, "a", "d", 3),
    )
    assert path_delay(p) == 3
    with pytest.raises(ConfigError):
        path_delay(())


def test_vertex_count_constant_under_occupy_release():
    fx = get_fixture("conflict4")
    g = fx.build()
    v0 = g.n_vertices
    occupy(g, f1_assignment(fx))
    assert g.n_vertices == v0
    release(g, "f1")
    assert g.n_vertices == v0
