"""VLink embedding order that minimises the commonality index.

Two VLinks are "common" in proportion to how many of their candidate path
pairs share at least one substrate link. An order's index is the worst, over
VLinks, of the commonality accumulated from VLinks placed before it. The
greedy below fills the order back to front, each time taking the VLink whose
remaining total commonality is smallest; this is optimal by an exchange
argument, and :func:`brute_force_order` exists to check that claim.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, Sequence

from .topology import SPath

VLinkId = Hashable


def id_key(vid) -> tuple:
    """Sort key putting integer-like ids in numeric order ahead of other ids."""
    if isinstance(vid, int):
        return (0, vid, "")
    s = str(vid)
    if s.lstrip("-").isdigit():
        return (0, int(s), s)
    return (1, 0, s)


def pair_commonality(pi_set: Sequence[SPath], pj_set: Sequence[SPath]) -> int:
    sets_j = [p.link_set for p in pj_set]
    count = 0
    for p in pi_set:
        links = p.link_set
        count += sum(1 for q in sets_j if not links.isdisjoint(q))
    return count


@dataclass
class AuxGraph:
    nodes: list[VLinkId]
    weights: dict[frozenset, int] = field(default_factory=dict)

    def weight(self, a: VLinkId, b: VLinkId) -> int:
        return self.weights.get(frozenset((a, b)), 0)

    def node_weight(self, node: VLinkId, among: Iterable[VLinkId] | None = None) -> int:
        others = self.nodes if among is None else among
        return sum(self.weight(node, o) for o in others if o != node)

    def edges(self) -> list[tuple[VLinkId, VLinkId, int]]:
        out = []
        for key, w in self.weights.items():
            a, b = sorted(key, key=id_key)
            out.append((a, b, w))
        return sorted(out, key=lambda e: (id_key(e[0]), id_key(e[1])))


def build_aux_graph(candidates: Mapping[VLinkId, Sequence[SPath]]) -> AuxGraph:
    """Complete weighted graph over VLinks; zero-weight edges are left out."""
    nodes = list(candidates)
    aux = AuxGraph(nodes)
    for a, b in itertools.combinations(nodes, 2):
        w = pair_commonality(_paths(candidates[a]), _paths(candidates[b]))
        if w:
            aux.weights[frozenset((a, b))] = w
    return aux


def _paths(cands) -> Sequence[SPath]:
    return cands.paths if hasattr(cands, "paths") else cands


@dataclass(frozen=True)
class VLinkOrder:
    order: tuple[VLinkId, ...]
    commonality_index: int


def commonality_index_of(order: Sequence[VLinkId], aux: AuxGraph) -> int:
    worst = 0
    for i, node in enumerate(order):
        worst = max(worst, sum(aux.weight(node, prev) for prev in order[:i]))
    return worst


def get_vlink_order(aux: AuxGraph) -> VLinkOrder:
    if not aux.nodes:
        raise ValueError("auxiliary graph has no nodes")
    remaining = list(aux.nodes)
    weight = {n: aux.node_weight(n) for n in remaining}
    order: list[VLinkId] = [None] * len(remaining)  # type: ignore[list-item]
    slot = len(remaining) - 1
    while remaining:
        pick = min(remaining, key=lambda n: (weight[n], id_key(n)))
        order[slot] = pick
        slot -= 1
        remaining.remove(pick)
        for n in remaining:
            weight[n] -= aux.weight(pick, n)
    return VLinkOrder(tuple(order), commonality_index_of(order, aux))


def brute_force_order(aux: AuxGraph) -> VLinkOrder:
    """Minimum-index order over all permutations (factorial; small inputs only)."""
    best = None
    for perm in itertools.permutations(sorted(aux.nodes, key=id_key)):
        idx = commonality_index_of(perm, aux)
        if best is None or idx < best.commonality_index:
            best = VLinkOrder(perm, idx)
    return best
