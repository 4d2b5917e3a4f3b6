"""Exact optimum for tiny instances by depth-first branch and bound.

Per VLink the search picks a multiset of at most q (path, config) splits that
meets the demand and keeps bsr% of it alive under every single-link failure.
A joint placement of slice windows over all chosen splits then decides
spectrum feasibility. Only left-justified placements are tried: any feasible
placement can be slid down until each window starts at slice 1 or right
after a window it shares a link with, so nothing feasible is lost.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Sequence

from .errors import BudgetExceeded
from .orchestrator import VLink, VnEmbedding, VnRequest, vn_eps
from .ordering import build_aux_graph, get_vlink_order
from .reach import ReachTable, TransmissionConfig
from .spectrum import SpectrumState
from .topology import Candidates, EonTopology, SPath, precompute_candidates
from .vlink_embed import Split, VLinkEmbedding


@dataclass(frozen=True)
class ExactBudget:
    max_vlinks: int = 3
    max_k: int = 6
    max_q: int = 4
    max_slices: int = 64
    max_nodes: int = 5_000_000
    max_seconds: float = 120.0

    def __post_init__(self) -> None:
        for name, value in vars(self).items():
            if not value > 0:
                raise ValueError(f"budget {name} must be positive")


@dataclass
class ExactResult:
    status: str  # "optimal" | "infeasible" | "budget_exceeded"
    embedding: VnEmbedding | None = None
    nodes: int = 0
    detail: str = ""

    @property
    def objective(self) -> Fraction | None:
        return self.embedding.objective if self.embedding else None

    @property
    def ssu(self) -> int | None:
        return self.embedding.ssu if self.embedding else None


@dataclass(frozen=True)
class _Option:
    cost: int
    splits: int
    items: tuple[tuple[int, TransmissionConfig], ...]  # (path index, config)


def pareto_configs(configs: Sequence[TransmissionConfig]) -> list[TransmissionConfig]:
    """Drop configs beaten by another with rate >= and slices <= (one of them strict)."""
    ordered = sorted(configs, key=lambda c: (c.slice_count, -c.rate, -c.reach_km, c.row_id))
    kept: list[TransmissionConfig] = []
    for c in ordered:
        if any(o.rate >= c.rate and o.slice_count <= c.slice_count for o in kept):
            continue
        kept.append(c)
    return kept


def survives(items, paths: Sequence[SPath], demand, bsr) -> bool:
    need = Fraction(bsr) * Fraction(demand) / 100
    total = sum(cfg.rate for _, cfg in items)
    if total < demand:
        return False
    used = {l for pi, _ in items for l in paths[pi].links}
    for e in used:
        if total - sum(cfg.rate for pi, cfg in items if e in paths[pi].links) < need:
            return False
    return True


def vlink_options(vlink: VLink, cands: Candidates, q: int) -> list[_Option]:
    """All split multisets satisfying demand and survivability, cheapest first."""
    paths = cands.paths
    pool = [(pi, cfg) for pi in range(len(paths)) for cfg in pareto_configs(cands.admissible[pi])]
    pool.sort(key=lambda it: (it[0], it[1].row_id))
    out = []
    for size in range(1, q + 1):
        for combo in itertools.combinations_with_replacement(range(len(pool)), size):
            items = tuple(pool[i] for i in combo)
            if survives(items, paths, vlink.demand, vlink.bsr):
                cost = sum(cfg.slice_count * paths[pi].hop_count for pi, cfg in items)
                out.append((cost, size, combo, items))
    out.sort(key=lambda o: (o[0], o[1], o[2]))
    return [_Option(c, s, items) for c, s, _, items in out]


class _Search:
    def __init__(self, budget: ExactBudget):
        self.budget = budget
        self.nodes = 0
        self.deadline = time.monotonic() + budget.max_seconds

    def tick(self) -> None:
        self.nodes += 1
        if self.nodes > self.budget.max_nodes:
            raise BudgetExceeded(f"node cap {self.budget.max_nodes} reached")
        if self.nodes % 4096 == 0 and time.monotonic() > self.deadline:
            raise BudgetExceeded(f"time cap {self.budget.max_seconds}s reached")


def place(
    splits: Sequence[tuple[tuple[int, ...], int]],
    slice_count: int,
    link_count: int,
    background: SpectrumState | None,
    search: _Search,
) -> list[int] | None:
    """Start slices for (links, width) splits with no overlap, or None if impossible."""
    m = len(splits)
    load = [0] * link_count
    for links, n in splits:
        for l in links:
            load[l] += n
    base = [background.mask(l) if background else 0 for l in range(link_count)]
    for l in range(link_count):
        if load[l] + bin(base[l]).count("1") > slice_count:
            return None
    masks = list(base)
    starts: list[int | None] = [None] * m
    # identical splits are interchangeable: force their starts to increase
    twin_prev = [None] * m
    for i in range(m):
        for j in range(i - 1, -1, -1):
            if splits[j] == splits[i]:
                twin_prev[i] = j
                break

    def candidates_for(i: int) -> list[int]:
        links, n = splits[i]
        pos = {1}
        for j in range(m):
            if starts[j] is not None and not set(splits[j][0]).isdisjoint(links):
                pos.add(starts[j] + splits[j][1])
        for l in links:
            mask = base[l]
            s = 1
            while mask:
                if mask & 1:
                    pos.add(s + 1)
                mask >>= 1
                s += 1
        return sorted(p for p in pos if p + n - 1 <= slice_count)

    def fits(i: int, sb: int) -> bool:
        links, n = splits[i]
        win = ((1 << n) - 1) << (sb - 1)
        return all(not masks[l] & win for l in links)

    def rec(placed: int, last: tuple[int, int]) -> bool:
        if placed == m:
            return True
        search.tick()
        for i in range(m):
            if starts[i] is not None:
                continue
            tp = twin_prev[i]
            if tp is not None and starts[tp] is None:
                continue
            links, n = splits[i]
            for sb in candidates_for(i):
                if (sb, i) <= last:
                    continue
                if tp is not None and sb <= starts[tp]:
                    continue
                if not fits(i, sb):
                    continue
                win = ((1 << n) - 1) << (sb - 1)
                starts[i] = sb
                for l in links:
                    masks[l] |= win
                if rec(placed + 1, (sb, i)):
                    return True
                for l in links:
                    masks[l] &= ~win
                starts[i] = None
        return False

    if rec(0, (0, -1)):
        return [s for s in starts]  # type: ignore[misc]
    return None


def solve_exact(
    topo: EonTopology,
    reach: ReachTable,
    vn: VnRequest,
    budget: ExactBudget | None = None,
    k: int = 4,
    q: int = 3,
    eps: Fraction | None = None,
    background: SpectrumState | None = None,
    prune: bool = True,
    candidates=None,
) -> ExactResult:
    """Minimum slices*hops + eps*splits embedding of ``vn`` over k-shortest candidates."""
    budget = budget or ExactBudget()
    for what, value, limit in (
        ("VLinks", len(vn.vlinks), budget.max_vlinks),
        ("k", k, budget.max_k),
        ("q", q, budget.max_q),
        ("slices", topo.slice_count, budget.max_slices),
    ):
        if value > limit:
            return ExactResult("budget_exceeded", detail=f"{what}={value} exceeds limit {limit}")
    if candidates is None:
        candidates = precompute_candidates(topo, vn, reach, k)
    eps = eps if eps is not None else vn_eps(topo, vn, q)
    vlinks = list(vn.vlinks)
    options = [vlink_options(v, candidates[v.id], q) for v in vlinks]
    if any(not o for o in options):
        return ExactResult("infeasible", detail="a VLink has no demand/survivability-feasible split set")
    search = _Search(budget)
    rest_lb = [0] * (len(vlinks) + 1)
    for i in range(len(vlinks) - 1, -1, -1):
        best_i = options[i][0]
        rest_lb[i] = rest_lb[i + 1] + best_i.cost + eps * best_i.splits

    best: list = [None, None]  # objective, chosen options
    chosen: list[_Option] = []

    def obj(o: _Option) -> Fraction:
        return o.cost + eps * o.splits

    def spectrum_ok(sel: Sequence[_Option]):
        flat = []
        for vi, o in enumerate(sel):
            paths = candidates[vlinks[vi].id].paths
            for pi, cfg in o.items:
                flat.append((paths[pi].links, cfg.slice_count))
        return place(flat, topo.slice_count, len(topo.links), background, search)

    def dfs(i: int, acc: Fraction) -> None:
        search.tick()
        if i == len(vlinks):
            if best[0] is not None and acc >= best[0]:
                return
            starts = spectrum_ok(chosen)
            if starts is not None:
                best[0] = acc
                best[1] = (list(chosen), starts)
            return
        for o in options[i]:
            val = acc + obj(o)
            if prune and best[0] is not None and val + rest_lb[i + 1] >= best[0]:
                break
            chosen.append(o)
            if not prune or _capacity_ok(chosen):
                dfs(i + 1, val)
            chosen.pop()

    def _capacity_ok(sel: Sequence[_Option]) -> bool:
        load = [0] * len(topo.links)
        for vi, o in enumerate(sel):
            paths = candidates[vlinks[vi].id].paths
            for pi, cfg in o.items:
                for l in paths[pi].links:
                    load[l] += cfg.slice_count
        return all(x <= topo.slice_count for x in load)

    try:
        dfs(0, Fraction(0))
    except BudgetExceeded as exc:
        return ExactResult("budget_exceeded", nodes=search.nodes, detail=str(exc))
    if best[0] is None:
        return ExactResult("infeasible", nodes=search.nodes, detail="no spectrum-feasible combination")

    sel, starts = best[1]
    state = background.copy() if background else SpectrumState.for_topology(topo)
    embs: dict[str, VLinkEmbedding] = {}
    pos = 0
    for vi, o in enumerate(sel):
        v = vlinks[vi]
        paths = candidates[v.id].paths
        splits = []
        for j, (pi, cfg) in enumerate(o.items):
            sb = starts[pos]
            pos += 1
            split = Split(paths[pi], pi, cfg, sb, sb + cfg.slice_count - 1)
            state.commit(split.path, (split.s_b, split.s_t), (vn.name, v.id, j))
            splits.append(split)
        embs[v.id] = VLinkEmbedding(v.id, tuple(splits), eps)
    order = get_vlink_order(build_aux_graph({v.id: candidates[v.id] for v in vlinks}))
    return ExactResult("optimal", VnEmbedding(vn, order, embs, state, eps), nodes=search.nodes)


def with_bsr(vn: VnRequest, bsr) -> VnRequest:
    return VnRequest(vn.vnodes, tuple(replace(v, bsr=bsr) for v in vn.vlinks), vn.name)


def bsr_monotonicity_probe(
    topo: EonTopology,
    reach: ReachTable,
    vn: VnRequest,
    bsr_values: Sequence,
    budget: ExactBudget | None = None,
    k: int = 4,
    q: int = 3,
) -> list[tuple[object, ExactResult]]:
    """Exact result for the same VN with every VLink's bsr set to each value in turn."""
    return [(b, solve_exact(topo, reach, with_bsr(vn, b), budget, k, q)) for b in bsr_values]
