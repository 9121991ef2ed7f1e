"""Physical network model, slot arithmetic and seeded traffic generation.

Time is discrete: one slot is the time an MTU frame needs to cross one
link, so any frame traverses at most one link per slot.  All durations in
this package are expressed in slots unless a name says otherwise.
"""

from __future__ import annotations

import csv
import io
import math
import random
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import ConfigError

SWITCH = "switch"
END_SYSTEM = "es"

# Weights are kept inside uint64 so exported artifacts stay portable.
MAX_WEIGHT_TERM = 2**63 - 1


@dataclass(frozen=True)
class Node:
    name: str
    kind: str  # SWITCH or END_SYSTEM


@dataclass(frozen=True)
class Topology:
    """Directed graph of switches/end systems.

    A physical full-duplex cable appears as two directed links (u, v) and
    (v, u); `duplex` lines in the text format expand accordingly.
    """

    nodes: tuple[Node, ...]
    links: tuple[tuple[str, str], ...]

    def __post_init__(self):
        names = [n.name for n in self.nodes]
        if len(set(names)) != len(names):
            raise ConfigError("duplicate node names")
        known = set(names)
        seen = set()
        for u, v in self.links:
            if u == v:
                raise ConfigError(f"self-loop on {u}")
            if u not in known or v not in known:
                raise ConfigError(f"link ({u},{v}) references unknown node")
            if (u, v) in seen:
                raise ConfigError(f"duplicate link ({u},{v})")
            seen.add((u, v))
        for n in self.nodes:
            if n.kind not in (SWITCH, END_SYSTEM):
                raise ConfigError(f"unknown node kind {n.kind!r}")

    @property
    def node_names(self) -> tuple[str, ...]:
        return tuple(n.name for n in self.nodes)

    def kind_of(self, name: str) -> str:
        for n in self.nodes:
            if n.name == name:
                return n.kind
        raise KeyError(name)

    def end_systems(self) -> tuple[str, ...]:
        return tuple(n.name for n in self.nodes if n.kind == END_SYSTEM)

    def out_neighbors(self, u: str) -> list[str]:
        return sorted(v for (a, v) in self.links if a == u)

    def is_connected(self) -> bool:
        """Weak connectivity over the directed links."""
        if not self.nodes:
            return True
        adj: dict[str, set[str]] = {n.name: set() for n in self.nodes}
        for u, v in self.links:
            adj[u].add(v)
            adj[v].add(u)
        start = self.nodes[0].name
        seen = {start}
        stack = [start]
        while stack:
            for w in adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(self.nodes)


@dataclass(frozen=True)
class SlotConfig:
    """Slot length, admissible flow periods and the hyper-period N."""

    slot_len_us: int
    period_set: frozenset[int]
    N: int = field(init=False)

    def __post_init__(self):
        if not self.period_set:
            raise ConfigError("period set must not be empty")
        if any(p < 1 for p in self.period_set):
            raise ConfigError("periods must be >= 1 slot")
        object.__setattr__(self, "period_set", frozenset(self.period_set))
        object.__setattr__(self, "N", hyper_period(self.period_set))

    @property
    def periods(self) -> tuple[int, ...]:
        return tuple(sorted(self.period_set))


@dataclass(frozen=True)
class FlowRequest:
    """One periodic transmission request: every period_slots a frame must
    travel src -> dst within max_delay_slots of leaving the source."""

    id: str
    arrival_slot: int
    src: str
    dst: str
    period_slots: int
    max_delay_slots: int

    def __post_init__(self):
        if self.src == self.dst:
            raise ConfigError(f"flow {self.id}: src == dst")
        if self.arrival_slot < 1:
            raise ConfigError(f"flow {self.id}: arrival slot must be >= 1")
        if self.period_slots < 1 or self.max_delay_slots < 1:
            raise ConfigError(f"flow {self.id}: period and delay must be >= 1")

    def validate_against(self, cfg: SlotConfig) -> None:
        if self.period_slots not in cfg.period_set:
            raise ConfigError(
                f"flow {self.id}: period {self.period_slots} not in period set"
            )


@dataclass(frozen=True)
class TrafficProfile:
    """Random-trace recipe: how many flows, class mix and endpoint policy.

    `ratios` maps period (slots) -> fraction of flows in that class. The
    maximum tolerable delay of every generated flow is four periods.
    """

    ratios: Mapping[int, float]
    flow_count: int
    endpoint_policy: str = "any-node"  # or "end-systems-only"
    seed: int = 0

    def __post_init__(self):
        total = sum(self.ratios.values())
        if abs(total - 1.0) > 1e-9:
            raise ConfigError(f"class ratios sum to {total}, expected 1")
        if any(r < 0 for r in self.ratios.values()):
            raise ConfigError("class ratios must be >= 0")
        if self.endpoint_policy not in ("any-node", "end-systems-only"):
            raise ConfigError(f"unknown endpoint policy {self.endpoint_policy!r}")
        if self.flow_count < 0:
            raise ConfigError("flow count must be >= 0")

    def class_counts(self) -> dict[int, int]:
        """Deterministic split of flow_count among classes.

        Floor each share first, then hand the remainder out one by one to
        classes in descending ratio order (period ascending breaks ties).
        """
        floors = {
            p: int(self.ratios[p] * self.flow_count + 1e-9) for p in self.ratios
        }
        remainder = self.flow_count - sum(floors.values())
        order = sorted(self.ratios, key=lambda p: (-self.ratios[p], p))
        for i in range(remainder):
            floors[order[i % len(order)]] += 1
        return floors


MAX_DELAY_PERIODS = 4


def hyper_period(period_set: Iterable[int]) -> int:
    """Least common multiple of all periods; the schedule repeats with it."""
    periods = list(period_set)
    if not periods:
        raise ConfigError("cannot take hyper-period of an empty set")
    if any(p < 1 for p in periods):
        raise ConfigError("periods must be positive")
    return math.lcm(*periods)


def slots_from_micros(duration_us: int, slot_len_us: int) -> int:
    """Convert a microsecond duration to slots, refusing silent rounding."""
    if slot_len_us < 1:
        raise ConfigError("slot length must be >= 1 us")
    if duration_us % slot_len_us != 0:
        raise ConfigError(
            f"{duration_us} us is not a whole number of {slot_len_us} us slots"
        )
    return duration_us // slot_len_us


def build_ring(n: int) -> Topology:
    """Bidirectional ring of n combined switch/end-system nodes."""
    if n < 3:
        raise ConfigError("a ring needs at least 3 nodes")
    names = [f"n{i}" for i in range(1, n + 1)]
    nodes = tuple(Node(name, SWITCH) for name in names)
    links = []
    for i, name in enumerate(names):
        nxt = names[(i + 1) % n]
        links.append((name, nxt))
        links.append((nxt, name))
    return Topology(nodes, tuple(links))


def build_cev() -> Topology:
    """CEV-like fixture: 13 switches, 31 end systems.

    The switch core is a composite of five substructures: a central line of
    three switches, a three-switch star hanging off each end of the line,
    a four-switch ring off the center, and a tree formed by the attachment
    links between substructures.  The 31 end systems are spread round-robin
    over the switches.  The exact wiring of the real network is not
    reproduced; scale and heterogeneity are.
    """
    switches = [f"sw{i}" for i in range(1, 14)]
    cables = [
        # central line
        ("sw1", "sw2"),
        ("sw2", "sw3"),
        # star cluster at the left end: hub sw4, leaves sw5 sw6
        ("sw1", "sw4"),
        ("sw4", "sw5"),
        ("sw4", "sw6"),
        # star cluster at the right end: hub sw7, leaves sw8 sw9
        ("sw3", "sw7"),
        ("sw7", "sw8"),
        ("sw7", "sw9"),
        # ring of four off the center
        ("sw2", "sw10"),
        ("sw10", "sw11"),
        ("sw11", "sw12"),
        ("sw12", "sw13"),
        ("sw13", "sw10"),
    ]
    nodes = [Node(s, SWITCH) for s in switches]
    for i in range(1, 32):
        es = f"es{i}"
        home = switches[(i - 1) % 13]
        nodes.append(Node(es, END_SYSTEM))
        cables.append((home, es))
    links = []
    for u, v in cables:
        links.append((u, v))
        links.append((v, u))
    return Topology(tuple(nodes), tuple(links))


def generate_flows(
    profile: TrafficProfile, cfg: SlotConfig, topo: Topology
) -> list[FlowRequest]:
    """Seeded random trace of flow requests, one arrival per slot.

    Per-class counts follow profile.class_counts(); endpoints are drawn
    uniformly under the endpoint policy; the emission order interleaves the
    classes at random.  Identical seeds give identical traces.
    """
    for p in profile.ratios:
        if p not in cfg.period_set:
            raise ConfigError(f"profile period {p} not in slot config")
    rng = random.Random(profile.seed)
    if profile.endpoint_policy == "end-systems-only":
        eligible = sorted(topo.end_systems())
    else:
        eligible = sorted(topo.node_names)
    if len(eligible) < 2:
        raise ConfigError("need at least two eligible endpoint nodes")

    periods: list[int] = []
    for p, count in sorted(profile.class_counts().items()):
        periods.extend([p] * count)
    rng.shuffle(periods)

    flows = []
    for i, p in enumerate(periods, start=1):
        src = rng.choice(eligible)
        dst = rng.choice(eligible)
        while dst == src:
            dst = rng.choice(eligible)
        flows.append(
            FlowRequest(
                id=f"f{i}",
                arrival_slot=i,
                src=src,
                dst=dst,
                period_slots=p,
                max_delay_slots=MAX_DELAY_PERIODS * p,
            )
        )
    return flows


# --- topology text format ------------------------------------------------
#
# Line oriented, UTF-8, '#' starts a comment:
#   node <name> <switch|es>
#   duplex <u> <v>     (expands to both directions)
#   link <u> <v>       (one direction)


def topology_to_text(topo: Topology) -> str:
    out = []
    for n in topo.nodes:
        out.append(f"node {n.name} {n.kind}")
    links = set(topo.links)
    emitted = set()
    for u, v in topo.links:
        if (u, v) in emitted:
            continue
        if (v, u) in links:
            out.append(f"duplex {min(u, v)} {max(u, v)}")
            emitted.add((u, v))
            emitted.add((v, u))
        else:
            out.append(f"link {u} {v}")
            emitted.add((u, v))
    return "\n".join(out) + "\n"


def topology_from_text(text: str) -> Topology:
    nodes: list[Node] = []
    links: list[tuple[str, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "node" and len(parts) == 3:
            kind = parts[2]
            if kind not in (SWITCH, END_SYSTEM):
                raise ConfigError(f"line {lineno}: unknown kind {kind!r}")
            nodes.append(Node(parts[1], kind))
        elif parts[0] == "duplex" and len(parts) == 3:
            links.append((parts[1], parts[2]))
            links.append((parts[2], parts[1]))
        elif parts[0] == "link" and len(parts) == 3:
            links.append((parts[1], parts[2]))
        else:
            raise ConfigError(f"line {lineno}: cannot parse {raw!r}")
    return Topology(tuple(nodes), tuple(links))


# --- flow trace CSV -------------------------------------------------------

TRACE_HEADER = ["id", "arrival_slot", "src", "dst", "period_slots", "deadline_slots"]


def trace_to_csv(flows: Sequence[FlowRequest]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_HEADER)
    for f in flows:
        w.writerow(
            [f.id, f.arrival_slot, f.src, f.dst, f.period_slots, f.max_delay_slots]
        )
    return buf.getvalue()


def trace_from_csv(text: str) -> list[FlowRequest]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != TRACE_HEADER:
        raise ConfigError(f"flow trace must start with header {','.join(TRACE_HEADER)}")
    flows = []
    for row in rows[1:]:
        if not row:
            continue
        if len(row) != 6:
            raise ConfigError(f"bad trace row: {row!r}")
        flows.append(
            FlowRequest(
                id=row[0],
                arrival_slot=int(row[1]),
                src=row[2],
                dst=row[3],
                period_slots=int(row[4]),
                max_delay_slots=int(row[5]),
            )
        )
    return flows
