"""Supported-period sets and transmission-capability weights.

A transmission copy (link, q) supports period p iff the copy itself and
every replica copy (link, q') with q' = q mod p is free.  Its weight is

    w = sum over supported p of alpha ** (N / p)

so copies that can still carry small-period flows weigh more, and a path
search that minimizes total weight steers new flows away from them.
Caching edges always weigh 0 and are not tracked here.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable

from .errors import ConfigError
from .model import MAX_WEIGHT_TERM, SlotConfig

if TYPE_CHECKING:  # pragma: no cover
    from .tseg import Tseg


@dataclass(frozen=True)
class WeightConfig:
    """Base of the exponential weight terms; any integer >= 2."""

    alpha_base: int = 2

    def __post_init__(self):
        if self.alpha_base < 2:
            raise ConfigError("alpha base must be an integer >= 2")


def check_weight_range(cfg: SlotConfig, weight_cfg: WeightConfig) -> None:
    """Reject configurations whose largest weight term leaves uint64 range."""
    biggest = weight_cfg.alpha_base ** (cfg.N // min(cfg.period_set))
    if biggest > MAX_WEIGHT_TERM:
        raise ConfigError(
            f"alpha^(N/min period) = {biggest} exceeds the representable range"
        )


def edge_weight(P: Iterable[int], N: int, alpha_base: int) -> int:
    """Weight of a copy from its supported-period set; 0 for an empty set."""
    total = 0
    for p in P:
        if p < 1 or N % p != 0:
            raise ConfigError(f"period {p} does not divide hyper-period {N}")
        total += alpha_base ** (N // p)
    return total


def supported_periods(tseg: "Tseg", link: tuple[str, str], q: int) -> frozenset[int]:
    """From-scratch scan of which periods the copy (link, q) supports.

    This is the defining computation; the incremental state kept on the
    graph must always agree with it (see update_on_occupy).
    """
    li = tseg._require_copy(link, q)
    occ = tseg._occupant[li]
    if occ[q] is not None:
        return frozenset()
    N = tseg.cfg.N
    supported = set()
    for p in tseg.cfg.period_set:
        first = ((q - 1) % p) + 1
        if all(occ[s] is None for s in range(first, N + 1, p)):
            supported.add(p)
    return frozenset(supported)


def recompute_link(tseg: "Tseg", li: int) -> None:
    """Rebuild supported sets and weights of one link from its occupancy."""
    N = tseg.cfg.N
    alpha = tseg.weight_cfg.alpha_base
    occ = tseg._occupant[li]
    class_free: dict[int, list[bool]] = {}
    for p in tseg.cfg.period_set:
        free = []
        for r in range(1, p + 1):
            free.append(all(occ[s] is None for s in range(r, N + 1, p)))
        class_free[p] = free
    sup = tseg._support[li]
    wgt = tseg._weight[li]
    for q in range(1, N + 1):
        if occ[q] is not None:
            sup[q] = set()
            wgt[q] = 0
        else:
            P = {p for p in tseg.cfg.period_set if class_free[p][(q - 1) % p]}
            sup[q] = P
            wgt[q] = edge_weight(P, N, alpha)


def update_on_occupy(
    tseg: "Tseg", removed_copies: Iterable[tuple[tuple[str, str], int]]
) -> tuple[tuple[tuple[str, str], int], ...]:
    """Incremental update after copies were removed (marked occupied).

    For every removed copy (link, r) and every period p it supported
    before removal, p is withdrawn from all surviving copies (link, q')
    with q' = r mod p: their replica class now has a hole at r.  Weights
    of all touched copies are recomputed.  Returns the touched copies.

    The removed copies must already be marked occupied; their stored
    support sets still hold the pre-removal values and are cleared here.
    """
    N = tseg.cfg.N
    alpha = tseg.weight_cfg.alpha_base
    removed = sorted(removed_copies)
    changed: set[tuple[tuple[str, str], int]] = set()
    for link, r in removed:
        li = tseg.link_idx[link]
        former = tseg._support[li][r]
        occ = tseg._occupant[li]
        sup = tseg._support[li]
        for p in sorted(former):
            first = ((r - 1) % p) + 1
            for q in range(first, N + 1, p):
                if q == r or occ[q] is not None:
                    continue
                if p in sup[q]:
                    sup[q].discard(p)
                    changed.add((link, q))
    for link, r in removed:
        li = tseg.link_idx[link]
        tseg._support[li][r] = set()
        tseg._weight[li][r] = 0
    for link, q in changed:
        li = tseg.link_idx[link]
        tseg._weight[li][q] = edge_weight(tseg._support[li][q], N, alpha)
    return tuple(sorted(changed))


def total_weight(tseg: "Tseg") -> int:
    """Sum of weights over all surviving transmission copies."""
    N = tseg.cfg.N
    return sum(w[q] for w in tseg._weight for q in range(1, N + 1))
