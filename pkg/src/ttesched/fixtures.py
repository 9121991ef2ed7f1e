"""Built-in named instances for demos and regression tests."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ConfigError
from .model import SWITCH, FlowRequest, Node, SlotConfig, Topology
from .tseg import Tseg, build_tseg
from .weighting import WeightConfig


@dataclass(frozen=True)
class Fixture:
    name: str
    topo: Topology
    cfg: SlotConfig
    blocked: frozenset[tuple[tuple[str, str], int]]
    flows: tuple[FlowRequest, ...]
    weight_cfg: WeightConfig = field(default_factory=WeightConfig)

    def build(self) -> Tseg:
        return build_tseg(self.topo, self.cfg, self.weight_cfg, self.blocked)


def _conflict4() -> Fixture:
    """Four nodes s, a, b, d with the diamond of one-way links
    (s,a), (a,d), (s,b), (b,d); N = 4, periods {2, 4}, alpha = 2.

    Background reservations leave these copies free:
        (s,b) @ 1,2,3,4   (b,d) @ 1,2,3,4   (s,a) @ 2   (a,d) @ 4

    The instance fits three requests (two with period 2, one with period
    4) only if the period-4 flow is routed via a; a delay-greedy scheduler
    sends it via b and then has to reject the third flow.
    """
    topo = Topology(
        nodes=tuple(Node(x, SWITCH) for x in "sabd"),
        links=(("s", "a"), ("a", "d"), ("s", "b"), ("b", "d")),
    )
    cfg = SlotConfig(slot_len_us=12, period_set=frozenset({2, 4}))
    free = {
        ("s", "b"): {1, 2, 3, 4},
        ("b", "d"): {1, 2, 3, 4},
        ("s", "a"): {2},
        ("a", "d"): {4},
    }
    blocked = frozenset(
        (link, q)
        for link in topo.links
        for q in range(1, 5)
        if q not in free[link]
    )
    flows = (
        FlowRequest("f1", 1, "s", "d", 2, 4),
        FlowRequest("f2", 2, "s", "d", 4, 8),
        FlowRequest("f3", 3, "s", "d", 2, 4),
    )
    return Fixture("conflict4", topo, cfg, blocked, flows, WeightConfig(2))


_REGISTRY = {"conflict4": _conflict4}


def fixture_names() -> tuple[str, ...]:
    return tuple(sorted(_REGISTRY))


def get_fixture(name: str) -> Fixture:
    try:
        return _REGISTRY[name]()
    except KeyError:
        raise ConfigError(
            f"unknown fixture {name!r}; available: {', '.join(fixture_names())}"
        ) from None
