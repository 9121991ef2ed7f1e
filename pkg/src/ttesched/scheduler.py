"""Online joint routing and scheduling over the TSEG.

For an arriving flow with period p, every start slot in [1, p] is tried;
each try runs a constraint-aware minimum-weight path search from the
source vertex at that slot.  The search honors three rules the plain
shortest-path algorithms cannot express:

* every transmission edge on the path must support period p,
* a frame entering a node by transmission must wait (caching edge) before
  its next transmission,
* total delay (waiting edges + 1) stays within the flow's budget.

The default search is an exact dynamic program over elapsed slots: after
e waiting steps from start slot i the frame is necessarily in slot
wrap(i + e), so the state (node, entered-via-transmission?, e) forms a
DAG that one forward sweep solves optimally.  A single-label Dijkstra
variant (one best label per vertex, the textbook shape of the procedure)
is kept behind ``label_mode="single"`` for comparison; it can return
heavier paths because one label cannot represent both a cheap-but-slow
and a fast-but-pricey way of reaching a vertex.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Optional

from .errors import ConfigError
from .model import FlowRequest
from .tseg import (
    CACHE,
    IH,
    TX,
    Assignment,
    PathEdge,
    Tseg,
    build_assignment,
    occupy,
    path_delay,
)

INF = float("inf")

OBJ_WEIGHT = "weight"
OBJ_DELAY = "wop"  # weight-oblivious: minimize delay, then hop count

LABEL_DP = "dp"
LABEL_SINGLE = "single"


@dataclass(frozen=True)
class SearchLabel:
    """One label of the single-label search: best-known weight of a path
    from the source to `vertex`, with enough context to honor the
    transmission/caching alternation."""

    vertex: tuple[str, int]
    best_weight: int
    parent: Optional[tuple[str, int]]
    elapsed: int


@dataclass(frozen=True)
class PathResult:
    """Outcome of one start-slot search."""

    start_slot: int
    weight: int
    delay: int
    hops: int
    path: tuple[PathEdge, ...]

    @property
    def node_seq(self) -> tuple[str, ...]:
        if not self.path:
            return ()
        return (self.path[0].u,) + tuple(e.v for e in self.path)


@dataclass
class CandidateSet:
    """Minimum-weight candidate found for each start slot (if any)."""

    per_start: dict[int, PathResult] = field(default_factory=dict)

    def add(self, r: Optional[PathResult]) -> None:
        if r is not None:
            self.per_start[r.start_slot] = r

    def best(self, objective: str = OBJ_WEIGHT) -> Optional[PathResult]:
        if not self.per_start:
            return None
        if objective == OBJ_DELAY:
            key = lambda r: (r.delay, r.hops, r.start_slot)
        else:
            key = lambda r: (r.weight, r.start_slot)
        return min(self.per_start.values(), key=key)


def _wrap(slot: int, N: int) -> int:
    return ((slot - 1) % N) + 1


def _usable_dist_to_dst(tseg: Tseg, dst_i: int, period: int) -> list[int | float]:
    """Hop counts to the destination over links usable for this period."""
    n = len(tseg.node_names)
    in_adj: list[list[int]] = [[] for _ in range(n)]
    N = tseg.cfg.N
    for li, (u, v) in enumerate(tseg.links):
        occ = tseg._occupant[li]
        sup = tseg._support[li]
        if any(occ[q] is None and period in sup[q] for q in range(1, N + 1)):
            in_adj[tseg.node_idx[v]].append(tseg.node_idx[u])
    dist: list[int | float] = [INF] * n
    dist[dst_i] = 0
    frontier = [dst_i]
    d = 0
    while frontier:
        d += 1
        nxt = []
        for v in frontier:
            for u in in_adj[v]:
                if dist[u] == INF:
                    dist[u] = d
                    nxt.append(u)
        frontier = nxt
    return dist


def _min_supporting_weight(tseg: Tseg, period: int) -> int:
    best = None
    N = tseg.cfg.N
    for li in range(len(tseg.links)):
        occ = tseg._occupant[li]
        sup = tseg._support[li]
        wgt = tseg._weight[li]
        for q in range(1, N + 1):
            if occ[q] is None and period in sup[q]:
                if best is None or wgt[q] < best:
                    best = wgt[q]
    return best if best is not None else 0


def min_weight_path(
    tseg: Tseg,
    src: str,
    dst: str,
    start_slot: int,
    period: int,
    max_delay: int,
    *,
    objective: str = OBJ_WEIGHT,
    label_mode: str = LABEL_DP,
    _prune_bound: Optional[float] = None,
    _dist_hint: Optional[list] = None,
    _min_w_hint: Optional[int] = None,
) -> Optional[PathResult]:
    """Best feasible path from src at `start_slot` to dst, or None.

    With objective "weight" the total transmission-edge weight is
    minimized; with "wop" the delay is minimized, then the hop count.
    `_prune_bound` lets schedule() abandon a start slot that provably
    cannot beat an already-found candidate; the public contract (exact
    per-start optimum) holds when it is None.
    """
    if label_mode == LABEL_SINGLE:
        return _single_label_search(
            tseg, src, dst, start_slot, period, max_delay, objective
        )
    if label_mode != LABEL_DP:
        raise ConfigError(f"unknown label mode {label_mode!r}")

    N = tseg.cfg.N
    if not 1 <= start_slot <= period:
        raise ConfigError(f"start slot {start_slot} outside [1, {period}]")
    n = len(tseg.node_names)
    src_i = tseg.node_idx[src]
    dst_i = tseg.node_idx[dst]
    occupant = tseg._occupant
    support = tseg._support
    weights = tseg._weight
    out_adj = tseg.out_adj
    weighted = objective == OBJ_WEIGHT

    dist = (
        _dist_hint
        if _dist_hint is not None
        else _usable_dist_to_dst(tseg, dst_i, period)
    )
    if dist[src_i] == INF:
        return None
    min_w = (
        _min_w_hint
        if _min_w_hint is not None
        else (_min_supporting_weight(tseg, period) if weighted else 1)
    )

    wf: list = [INF] * n
    wf[src_i] = 0
    tx_parents: list[list[int]] = []
    cache_parents: list[list[int]] = []
    completions: list[tuple[int, int]] = []  # (cost, elapsed)
    best_cost: float = INF
    prune = _prune_bound if _prune_bound is not None else INF

    for e in range(max_delay):
        q = _wrap(start_slot + e, N)
        wt: list = [INF] * n
        tp = [-1] * n
        for u in range(n):
            wu = wf[u]
            if wu == INF or u == dst_i:
                continue
            for li, vi in out_adj[u]:
                if occupant[li][q] is not None or period not in support[li][q]:
                    continue
                cand = wu + (weights[li][q] if weighted else 1)
                if cand < wt[vi]:
                    wt[vi] = cand
                    tp[vi] = u
        tx_parents.append(tp)
        if wt[dst_i] < best_cost:
            best_cost = wt[dst_i]
            completions.append((wt[dst_i], e))
        if not weighted and completions:
            break  # first completing level is the minimum delay
        if weighted:
            bound = INF
            for u in range(n):
                lo = wf[u] if wf[u] <= wt[u] else wt[u]
                if lo < INF and dist[u] != INF:
                    b = lo + dist[u] * min_w
                    if b < bound:
                        bound = b
            if bound >= best_cost or bound >= prune:
                break
        if e + 1 >= max_delay:
            break
        new_wf: list = [INF] * n
        cp = [0] * n
        for v in range(n):
            if v == dst_i:
                continue
            a = wf[v]
            b = wt[v]
            if a <= b:
                if a < INF:
                    new_wf[v] = a
                    cp[v] = 1
            else:
                new_wf[v] = b
                cp[v] = 2
        cache_parents.append(cp)
        wf = new_wf

    if not completions:
        return None
    cost, e_star = min(completions)  # smallest cost, then smallest delay
    path = _reconstruct(
        tseg, src_i, dst_i, start_slot, e_star, tx_parents, cache_parents
    )
    weight = sum(
        tseg._weight[tseg.link_idx[(pe.u, pe.v)]][pe.slot]
        for pe in path
        if pe.kind == TX
    )
    hops = sum(1 for pe in path if pe.kind == TX)
    return PathResult(start_slot, weight, e_star + 1, hops, tuple(path))


def _reconstruct(
    tseg: Tseg,
    src_i: int,
    dst_i: int,
    start_slot: int,
    e_star: int,
    tx_parents: list[list[int]],
    cache_parents: list[list[int]],
) -> list[PathEdge]:
    N = tseg.cfg.N
    names = tseg.node_names
    edges: list[PathEdge] = []
    v, via_tx, e = dst_i, True, e_star
    while True:
        if via_tx:
            u = tx_parents[e][v]
            edges.append(PathEdge(TX, names[u], names[v], _wrap(start_slot + e, N)))
            v, via_tx = u, False
        else:
            if e == 0:
                break
            code = cache_parents[e - 1][v]
            slot = _wrap(start_slot + e - 1, N)
            kind = IH if slot == N else CACHE
            edges.append(PathEdge(kind, names[v], names[v], slot))
            via_tx = code == 2
            e -= 1
    assert v == src_i
    edges.reverse()
    return edges


def _single_label_search(
    tseg: Tseg,
    src: str,
    dst: str,
    start_slot: int,
    period: int,
    max_delay: int,
    objective: str,
) -> Optional[PathResult]:
    """One best label per TSEG vertex, relaxed Dijkstra-style.

    Kept for fidelity experiments: the parent-slot rule enforces the
    alternation, the delay window is tracked as elapsed waiting slots.
    """
    N = tseg.cfg.N
    weighted = objective == OBJ_WEIGHT
    start_v = (src, start_slot)
    # one label per vertex: (cost, id of the live heap entry); ties REPLACE
    # the label, matching the non-strict relaxation of the procedure
    best: dict[tuple[str, int], tuple[float, int]] = {start_v: (0, 0)}
    counter = 0
    # entry: (cost, entry id, vertex, parent slot, elapsed waiting slots)
    heap = [(0, counter, start_v, _wrap(start_slot - 1, N), 0)]
    settled: set[tuple[str, int]] = set()
    parents: dict[tuple[str, int], tuple[tuple[str, int], str]] = {}
    final: Optional[tuple[str, int]] = None
    while heap:
        cost, eid, (u, q), par_slot, elapsed = heapq.heappop(heap)
        if (u, q) in settled or best.get((u, q), (INF, -1))[1] != eid:
            continue  # already settled, or a tie replaced this label
        settled.add((u, q))
        if u == dst:
            final = (u, q)
            break
        if q != par_slot:  # entered via caching/start: transmission allowed
            for li, vi in tseg.out_adj[tseg.node_idx[u]]:
                v = tseg.node_names[vi]
                if tseg._occupant[li][q] is not None:
                    continue
                if period not in tseg._support[li][q]:
                    continue
                w = tseg._weight[li][q] if weighted else 1
                key = (v, q)
                if key not in settled and cost + w <= best.get(key, (INF, -1))[0]:
                    counter += 1
                    best[key] = (cost + w, counter)
                    parents[key] = ((u, q), TX)
                    heapq.heappush(heap, (cost + w, counter, key, q, elapsed))
        # caching / inter-hyper-period edge, always available
        if elapsed + 1 <= max_delay - 1:
            key = (u, _wrap(q + 1, N))
            if key not in settled and cost <= best.get(key, (INF, -1))[0]:
                counter += 1
                best[key] = (cost, counter)
                parents[key] = ((u, q), IH if q == N else CACHE)
                heapq.heappush(heap, (cost, counter, key, q, elapsed + 1))
    if final is None:
        return None
    edges: list[PathEdge] = []
    cur = final
    while cur != start_v:
        prev, kind = parents[cur]
        if kind == TX:
            edges.append(PathEdge(TX, prev[0], cur[0], prev[1]))
        else:
            edges.append(PathEdge(kind, prev[0], prev[0], prev[1]))
        cur = prev
    edges.reverse()
    if not edges or not any(pe.kind == TX for pe in edges):
        return None
    weight = sum(
        tseg._weight[tseg.link_idx[(pe.u, pe.v)]][pe.slot]
        for pe in edges
        if pe.kind == TX
    )
    hops = sum(1 for pe in edges if pe.kind == TX)
    return PathResult(start_slot, weight, path_delay(edges), hops, tuple(edges))


def find_candidates(
    tseg: Tseg,
    f: FlowRequest,
    *,
    objective: str = OBJ_WEIGHT,
    label_mode: str = LABEL_DP,
    prune: bool = False,
) -> CandidateSet:
    """Run the search from every start slot in [1, p].

    With prune=False every entry is the exact per-start optimum.  With
    prune=True a start slot that provably cannot beat the best candidate
    found so far may be skipped; only the overall best entry is reliable
    (that is all schedule() needs).
    """
    f.validate_against(tseg.cfg)
    for node in (f.src, f.dst):
        if node not in tseg.node_idx:
            raise ConfigError(f"flow {f.id}: unknown node {node}")
    cands = CandidateSet()
    if label_mode == LABEL_DP:
        dst_i = tseg.node_idx[f.dst]
        dist = _usable_dist_to_dst(tseg, dst_i, f.period_slots)
        min_w = (
            _min_supporting_weight(tseg, f.period_slots)
            if objective == OBJ_WEIGHT
            else 1
        )
    else:
        dist = min_w = None
    best_key = None
    for i in range(1, f.period_slots + 1):
        prune_bound = None
        delay_cap = f.max_delay_slots
        if prune and best_key is not None and label_mode == LABEL_DP:
            if objective == OBJ_WEIGHT:
                prune_bound = best_key[0]
            else:
                delay_cap = min(delay_cap, best_key[0])
        r = min_weight_path(
            tseg,
            f.src,
            f.dst,
            i,
            f.period_slots,
            delay_cap,
            objective=objective,
            label_mode=label_mode,
            _prune_bound=prune_bound,
            _dist_hint=dist,
            _min_w_hint=min_w,
        )
        if r is None:
            continue
        cands.add(r)
        key = (
            (r.weight, r.start_slot)
            if objective == OBJ_WEIGHT
            else (r.delay, r.hops, r.start_slot)
        )
        if best_key is None or key < best_key:
            best_key = key
    return cands


def schedule(
    tseg: Tseg,
    f: FlowRequest,
    *,
    objective: str = OBJ_WEIGHT,
    label_mode: str = LABEL_DP,
) -> Optional[Assignment]:
    """Admit the flow on the globally best feasible candidate, or reject.

    Rejection (None) is a normal outcome.  Ties among candidates break
    toward the smaller start slot; within one start slot the search's
    deterministic relaxation order fixes the path.
    """
    cands = find_candidates(
        tseg, f, objective=objective, label_mode=label_mode, prune=True
    )
    best = cands.best(objective)
    if best is None:
        return None
    a = build_assignment(f, best.start_slot, best.path, tseg.cfg.N)
    occupy(tseg, a)
    return a
