"""Time-slot expanded graph (TSEG) state and occupancy bookkeeping.

The TSEG has one vertex per (node, slot) for slots 1..N.  Edge types:

* transmission edges (u_q, v_q): link (u, v) crossed within slot q; a copy
  exists iff the slot is not occupied;
* caching edges (u_q, u_{q+1}) for q < N: the frame waits on u;
* inter-hyper-period edges (u_N, u_1): waiting across the wrap-around.

Caching and inter-hyper-period edges are implicit (infinite capacity,
weight 0); only transmission copies carry occupancy, a supported-period
set and a weight.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional, Sequence

from . import weighting
from .errors import ConfigError, ConflictError, UnknownFlowError
from .model import FlowRequest, SlotConfig, Topology

# Occupant marker for capacity that was never offered to the scheduler
# (pre-existing reservations in fixtures).  Not a flow id.
BACKGROUND = "*background*"

TX = "tx"
CACHE = "cache"
IH = "ih"


class PathEdge(NamedTuple):
    """One edge of a frame path.

    For kind 'tx', the frame crosses link (u, v) within `slot`.
    For kind 'cache'/'ih', u == v and `slot` is the departing slot: the
    frame waits on u from `slot` to the next slot (slot N wraps to 1).
    """

    kind: str
    u: str
    v: str
    slot: int

    @property
    def next_slot(self) -> int:
        if self.kind == TX:
            return self.slot
        return 1 if self.kind == IH else self.slot + 1


@dataclass(frozen=True)
class EdgeState:
    """Read-only view of one transmission copy."""

    occupied_by: Optional[str]
    supported_periods: frozenset[int]
    weight: int


@dataclass(frozen=True)
class Assignment:
    """One admitted flow: its frame path plus the periodic replica copies
    it occupies within the hyper-period."""

    flow: FlowRequest
    start_slot: int
    path: tuple[PathEdge, ...]
    replica_occupancy: frozenset[tuple[tuple[str, str], int]]

    @property
    def flow_id(self) -> str:
        return self.flow.id

    @property
    def node_seq(self) -> tuple[str, ...]:
        if not self.path:
            return ()
        return (self.path[0].u,) + tuple(e.v for e in self.path)

    @property
    def tx_edges(self) -> tuple[PathEdge, ...]:
        return tuple(e for e in self.path if e.kind == TX)


def replica_slots(q: int, p: int, N: int) -> tuple[int, ...]:
    """All slots congruent to q modulo p within [1, N], ascending."""
    if not 1 <= q <= N:
        raise ConfigError(f"slot {q} outside [1, {N}]")
    if p < 1 or N % p != 0:
        raise ConfigError(f"period {p} does not divide hyper-period {N}")
    first = ((q - 1) % p) + 1
    return tuple(range(first, N + 1, p))


def path_delay(path: Sequence[PathEdge]) -> int:
    """End-to-end delay in slots: waiting edges plus one for the final hop."""
    if not path:
        raise ConfigError("cannot take the delay of an empty path")
    return sum(1 for e in path if e.kind != TX) + 1


def build_assignment(
    flow: FlowRequest, start_slot: int, path: Sequence[PathEdge], N: int
) -> Assignment:
    """Assemble an Assignment, deriving the replica occupancy from the path."""
    occ = set()
    for e in path:
        if e.kind == TX:
            for q in replica_slots(e.slot, flow.period_slots, N):
                occ.add(((e.u, e.v), q))
    return Assignment(flow, start_slot, tuple(path), frozenset(occ))


class OccupyReport(NamedTuple):
    removed: tuple[tuple[tuple[str, str], int], ...]
    weight_changed: tuple[tuple[tuple[str, str], int], ...]


class Tseg:
    """Mutable TSEG state.  Single writer: all occupy/release calls must
    come from one logical thread; independent trials each build their own
    instance."""

    def __init__(
        self,
        topo: Topology,
        cfg: SlotConfig,
        weight_cfg: Optional[weighting.WeightConfig] = None,
        blocked: Iterable[tuple[tuple[str, str], int]] = (),
    ):
        self.topo = topo
        self.cfg = cfg
        self.weight_cfg = weight_cfg or weighting.WeightConfig()
        weighting.check_weight_range(cfg, self.weight_cfg)

        self.node_names: tuple[str, ...] = tuple(sorted(topo.node_names))
        self.node_idx = {u: i for i, u in enumerate(self.node_names)}
        self.links: tuple[tuple[str, str], ...] = tuple(sorted(topo.links))
        self.link_idx = {lk: i for i, lk in enumerate(self.links)}
        # out_adj[u index] -> list of (link index, v index), sorted by v
        self.out_adj: list[list[tuple[int, int]]] = [[] for _ in self.node_names]
        for li, (u, v) in enumerate(self.links):
            self.out_adj[self.node_idx[u]].append((li, self.node_idx[v]))

        N = cfg.N
        # slot index 0 unused; slots run 1..N
        self._occupant: list[list[Optional[str]]] = [
            [None] * (N + 1) for _ in self.links
        ]
        self._support: list[list[set[int]]] = [
            [set() for _ in range(N + 1)] for _ in self.links
        ]
        self._weight: list[list[int]] = [[0] * (N + 1) for _ in self.links]
        self.admitted: dict[str, Assignment] = {}

        for link, slot in blocked:
            li = self._require_copy(link, slot)
            self._occupant[li][slot] = BACKGROUND
        for li in range(len(self.links)):
            weighting.recompute_link(self, li)

    # --- introspection ----------------------------------------------------

    @property
    def n_vertices(self) -> int:
        return len(self.node_names) * self.cfg.N

    @property
    def caching_edge_count(self) -> int:
        return len(self.node_names) * (self.cfg.N - 1)

    @property
    def inter_hyper_edge_count(self) -> int:
        return len(self.node_names)

    def free_transmission_copies(self) -> int:
        N = self.cfg.N
        return sum(
            1
            for occ in self._occupant
            for q in range(1, N + 1)
            if occ[q] is None
        )

    def edge_state(self, link: tuple[str, str], slot: int) -> EdgeState:
        li = self._require_copy(link, slot)
        who = self._occupant[li][slot]
        if who is not None:
            return EdgeState(who, frozenset(), 0)
        return EdgeState(None, frozenset(self._support[li][slot]), self._weight[li][slot])

    def transmission_edges(self) -> dict[tuple[tuple[str, str], int], EdgeState]:
        """All existing (free) transmission copies."""
        out = {}
        for li, link in enumerate(self.links):
            for q in range(1, self.cfg.N + 1):
                if self._occupant[li][q] is None:
                    out[(link, q)] = self.edge_state(link, q)
        return out

    def occupant_of(self, link: tuple[str, str], slot: int) -> Optional[str]:
        li = self._require_copy(link, slot)
        return self._occupant[li][slot]

    def flow_occupied_count(self, link: tuple[str, str]) -> int:
        """Slots on this link held by admitted flows (background excluded)."""
        li = self.link_idx[link]
        occ = self._occupant[li]
        return sum(
            1
            for q in range(1, self.cfg.N + 1)
            if occ[q] is not None and occ[q] != BACKGROUND
        )

    def occupied_copies(self) -> set[tuple[tuple[str, str], int]]:
        return {
            (link, q)
            for li, link in enumerate(self.links)
            for q in range(1, self.cfg.N + 1)
            if self._occupant[li][q] is not None
        }

    def _require_copy(self, link: tuple[str, str], slot: int) -> int:
        if link not in self.link_idx:
            raise ConfigError(f"unknown link {link}")
        if not 1 <= slot <= self.cfg.N:
            raise ConfigError(f"slot {slot} outside [1, {self.cfg.N}]")
        return self.link_idx[link]


def build_tseg(
    topo: Topology,
    cfg: SlotConfig,
    weight_cfg: Optional[weighting.WeightConfig] = None,
    blocked: Iterable[tuple[tuple[str, str], int]] = (),
) -> Tseg:
    return Tseg(topo, cfg, weight_cfg, blocked)


def occupy(tseg: Tseg, a: Assignment) -> OccupyReport:
    """Mark all replica copies of an assignment occupied, atomically.

    Validates every copy before touching anything; on conflict the state is
    unchanged.  The weighting update runs after removal and the report
    carries both the removed copies and the copies whose weight changed.
    """
    if a.flow_id in tseg.admitted:
        raise ConflictError(f"flow {a.flow_id} already admitted")
    copies = sorted(a.replica_occupancy)
    for link, slot in copies:
        li = tseg._require_copy(link, slot)
        if tseg._occupant[li][slot] is not None:
            raise ConflictError(
                f"copy {link}@{slot} already occupied by {tseg._occupant[li][slot]}"
            )
    for link, slot in copies:
        tseg._occupant[tseg.link_idx[link]][slot] = a.flow_id
    changed = weighting.update_on_occupy(tseg, copies)
    tseg.admitted[a.flow_id] = a
    return OccupyReport(tuple(copies), changed)


def release(tseg: Tseg, flow_id: str) -> None:
    """Undo an admission: restore its copies and recompute affected links."""
    if flow_id not in tseg.admitted:
        raise UnknownFlowError(f"flow {flow_id} is not admitted")
    a = tseg.admitted.pop(flow_id)
    touched = set()
    for link, slot in a.replica_occupancy:
        li = tseg.link_idx[link]
        tseg._occupant[li][slot] = None
        touched.add(li)
    # Supported periods depend only on same-link occupancy, so a from-scratch
    # recompute of the touched links restores exact state.
    for li in sorted(touched):
        weighting.recompute_link(tseg, li)


GATE_TABLE_HEADER = "link_src,link_dst,slot,flow_id"


def export_gate_table(tseg: Tseg, assignments: Iterable[Assignment]) -> str:
    """Per-link per-slot reservations of the given assignments as CSV."""
    rows = []
    for a in assignments:
        for (u, v), slot in a.replica_occupancy:
            rows.append((u, v, slot, a.flow_id))
    rows.sort()
    lines = [GATE_TABLE_HEADER]
    lines.extend(f"{u},{v},{slot},{fid}" for u, v, slot, fid in rows)
    return "\n".join(lines) + "\n"


def parse_gate_table(text: str) -> list[tuple[str, str, int, str]]:
    lines = text.splitlines()
    if not lines or lines[0] != GATE_TABLE_HEADER:
        raise ConfigError(f"gate table must start with header {GATE_TABLE_HEADER}")
    rows = []
    for raw in lines[1:]:
        if not raw.strip():
            continue
        parts = raw.split(",")
        if len(parts) != 4:
            raise ConfigError(f"bad gate table row: {raw!r}")
        rows.append((parts[0], parts[1], int(parts[2]), parts[3]))
    return rows
