"""Embedding of a single VLink over disjoint path groups with bandwidth squeezing.

The search space follows the group-based construction:

* pick a non-empty subset of the retained disjoint groups and give each group
  a table rate so the group rates add up exactly to the demand;
* each path of a group carries max(d * bsr / (100 (|H| - 1)), d / |H|);
* per path, sum its shares over groups and round up to the next table rate;
* split each path's rate into one or more table rates (at most q splits in
  total) and place every split with the cheapest reaching config, First-fit.

Subset/rate-permutation enumeration is done as one DFS over the ordered
groups, which visits exactly the same (subset, ordered rate assignment)
pairs. The cheapest feasible plan under slices * hops + eps * splits wins.
"""

from __future__ import annotations

import bisect
import heapq
import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Sequence

from .reach import ReachTable, TransmissionConfig, best_config
from .spectrum import SpectrumState, commit, first_fit, rollback
from .topology import Candidates, SPath

log = logging.getLogger(__name__)


@dataclass
class EmbedParams:
    k: int = 25
    q: int = 8
    sigma: int = 3
    eps: Fraction | None = None
    # MDP attempts per consolidated path->rate map before giving up on it
    mdp_limit: int | None = 200

    def __post_init__(self) -> None:
        for name in ("k", "q", "sigma"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")


def default_eps(q: int, n_vlinks: int, slice_count: int, max_hops: int) -> Fraction:
    """Split-count weight strictly below one slice-hop of cost over the whole VN."""
    return Fraction(1, q * n_vlinks * slice_count * max(max_hops, 1) + 1)


@dataclass(frozen=True)
class DisjointGroup:
    members: tuple[int, ...]  # candidate path indices, ascending
    total_length_km: float

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def avg_length_km(self) -> float:
        return self.total_length_km / len(self.members)


@dataclass(frozen=True)
class Split:
    path: SPath
    path_index: int
    config: TransmissionConfig
    s_b: int
    s_t: int

    @property
    def rate(self) -> int:
        return self.config.rate

    @property
    def n_slices(self) -> int:
        return self.s_t - self.s_b + 1


@dataclass(frozen=True)
class VLinkEmbedding:
    vlink_id: Hashable
    splits: tuple[Split, ...]
    eps: Fraction = Fraction(0)

    @property
    def slice_cost(self) -> int:
        return sum(s.n_slices * s.path.hop_count for s in self.splits)

    @property
    def objective(self) -> Fraction:
        return self.slice_cost + self.eps * len(self.splits)

    @property
    def total_rate(self) -> int:
        return sum(s.rate for s in self.splits)


@dataclass
class EmbedTrace:
    groups: int = 0
    dfs_nodes: int = 0
    pruned: int = 0
    maps: int = 0
    plans: int = 0
    mdp_calls: int = 0
    mdp_failures: int = 0


@dataclass(frozen=True)
class MdpResult:
    n_slices: int
    configs: tuple[TransmissionConfig, ...]
    ranges: tuple[tuple[int, int], ...]


# --- disjoint groups ----------------------------------------------------------


def enumerate_groups(paths: Sequence[SPath] | Candidates, sigma: int, allow_single: bool = False) -> list[DisjointGroup]:
    """Per group size, the ``sigma`` link-disjoint path sets with smallest mean length.

    Size-1 "groups" are only produced with ``allow_single`` (unprotected VLinks).
    """
    if sigma < 1:
        raise ValueError("sigma must be positive")
    if isinstance(paths, Candidates):
        paths = paths.paths
    link_sets = [p.link_set for p in paths]
    n = len(paths)
    by_size: dict[int, list[DisjointGroup]] = {}

    def extend(members: list[int], start: int) -> None:
        for j in range(start, n):
            if all(link_sets[j].isdisjoint(link_sets[i]) for i in members):
                members.append(j)
                group = DisjointGroup(tuple(members), sum(paths[i].length_km for i in members))
                by_size.setdefault(len(members), []).append(group)
                extend(members, j + 1)
                members.pop()

    extend([], 0)
    chosen: list[DisjointGroup] = []
    for size in sorted(by_size):
        if size == 1 and not allow_single:
            continue
        ranked = sorted(by_size[size], key=lambda g: (round(g.avg_length_km, 9), g.members))
        chosen.extend(ranked[:sigma])
    return chosen


def group_path_rate(group_rate, group_size: int, bsr) -> Fraction:
    """Per-path share of a group's rate so any single path loss keeps bsr% of it."""
    if group_size < 2:
        raise ValueError("a disjoint group has at least two paths")
    d = Fraction(group_rate)
    bsr = Fraction(bsr)
    if not 0 <= bsr <= 100:
        raise ValueError("bsr must be within 0..100")
    return max(d * bsr / (100 * (group_size - 1)), d / group_size)


def consolidate(assignments: Sequence[tuple[Hashable, Fraction]], table: ReachTable) -> dict | None:
    """Sum each path's shares and round up onto the rate grid; None if any sum is off the top."""
    if not assignments:
        raise ValueError("nothing to consolidate")
    totals: dict = {}
    for path, rate in assignments:
        totals[path] = totals.get(path, Fraction(0)) + Fraction(rate)
    out = {}
    for path, total in totals.items():
        r = table.round_up_rate(total)
        if r is None:
            return None
        out[path] = r
    return out


# --- rate decompositions --------------------------------------------------------


def rate_multisets(rates: Sequence[int], total: int, max_parts: int, min_parts: int = 1) -> list[tuple[int, ...]]:
    """All multisets (non-increasing tuples) of ``rates`` summing to ``total``."""
    desc = sorted(set(rates), reverse=True)
    out: list[tuple[int, ...]] = []
    parts: list[int] = []

    def rec(start: int, rem: int) -> None:
        if rem == 0:
            if len(parts) >= min_parts:
                out.append(tuple(parts))
            return
        if len(parts) == max_parts:
            return
        for j in range(start, len(desc)):
            r = desc[j]
            if r > rem:
                continue
            if r * (max_parts - len(parts)) < rem:
                break
            parts.append(r)
            rec(j, rem - r)
            parts.pop()

    rec(0, total)
    return out


class _PathCosts:
    """Memoised config choice and split-decomposition costs per candidate path."""

    def __init__(self, paths: Sequence[SPath], table: ReachTable, q: int, state: SpectrumState | None = None):
        self.paths = paths
        self.table = table
        self.q = q
        # spectrum limits that hold for any plan probed against this state:
        # widest free window and free-slice count on each path
        self._room: list[tuple[int, int]] | None = None
        if state is not None:
            self._room = [_path_room(state, p) for p in paths]
        self._cfg: dict[tuple[int, int], TransmissionConfig | None] = {}
        self._opts: dict[tuple[int, int], list[tuple[int, int, tuple[int, ...]]]] = {}
        self._floor: dict[tuple[int, int], int | None] = {}
        self._multisets: dict[int, list[tuple[int, ...]]] = {}

    def config(self, pi: int, rate: int) -> TransmissionConfig | None:
        key = (pi, rate)
        if key not in self._cfg:
            self._cfg[key] = best_config(self.table, rate, self.paths[pi].length_km)
        return self._cfg[key]

    def options(self, pi: int, total: int) -> list[tuple[int, int, tuple[int, ...]]]:
        """(cost, parts, rates) ways to carry ``total`` on path ``pi``, cheapest first."""
        key = (pi, total)
        if key not in self._opts:
            if total not in self._multisets:
                self._multisets[total] = rate_multisets(self.table.rates, total, self.q)
            hops = self.paths[pi].hop_count
            widest, free = self._room[pi] if self._room else (1 << 30, 1 << 30)
            opts = []
            for ms in self._multisets[total]:
                slices = 0
                for r in ms:
                    cfg = self.config(pi, r)
                    if cfg is None or cfg.slice_count > widest:
                        break
                    slices += cfg.slice_count
                else:
                    if slices <= free:
                        opts.append((slices * hops, len(ms), ms))
            opts.sort()
            self._opts[key] = opts
        return self._opts[key]

    def floor(self, pi: int, x: Fraction) -> int | None:
        """Lower bound on the cost of carrying at least ``x`` on path ``pi``."""
        r = self.table.round_up_rate(x)
        return None if r is None else self.floor_at(pi, r)

    def floor_at(self, pi: int, r: int) -> int | None:
        key = (pi, r)
        if key not in self._floor:
            best = None
            for rate in self.table.rates:
                if rate < r:
                    continue
                opts = self.options(pi, rate)
                if opts and (best is None or opts[0][0] < best):
                    best = opts[0][0]
            self._floor[key] = best
        return self._floor[key]


def _path_room(state: SpectrumState, path: SPath) -> tuple[int, int]:
    busy = state.union_mask(path.links)
    free = 0
    widest = 0
    run = 0
    for s in range(state.slice_count):
        if (busy >> s) & 1:
            run = 0
        else:
            run += 1
            free += 1
            widest = max(widest, run)
    return widest, free


# --- MDP -------------------------------------------------------------------------


_SCRATCH = ("__mdp_scratch__",)


def mdp(
    plan: Sequence[tuple[SPath, int]],
    table: ReachTable,
    state: SpectrumState,
    config_for=None,
) -> MdpResult | None:
    """Cheapest reaching config and a First-fit window for each (path, rate) entry, in order.

    The state is probed with scratch commits that are rolled back before returning.
    """
    configs = []
    ranges = []
    try:
        for i, (path, rate) in enumerate(plan):
            cfg = config_for(i) if config_for else best_config(table, rate, path.length_km)
            if cfg is None:
                return None
            rng = first_fit(state, path, cfg.slice_count)
            if rng is None:
                return None
            commit(state, path, rng, _SCRATCH)
            configs.append(cfg)
            ranges.append(rng)
    finally:
        rollback(state, _SCRATCH)
    return MdpResult(sum(c.slice_count for c in configs), tuple(configs), tuple(ranges))


# --- search ------------------------------------------------------------------------


def survives(splits: Sequence[Split], demand, bsr, link_ids) -> bool:
    need = Fraction(bsr) * Fraction(demand) / 100
    total = sum(s.rate for s in splits)
    for e in link_ids:
        if total - sum(s.rate for s in splits if e in s.path.links) < need:
            return False
    return True


def find_embedding(
    vlink,
    candidates: Candidates,
    groups: Sequence[DisjointGroup],
    table: ReachTable,
    state: SpectrumState,
    params: EmbedParams,
    eps: Fraction | None = None,
    trace: EmbedTrace | None = None,
) -> VLinkEmbedding | None:
    """Cheapest feasible embedding of ``vlink`` in the group-based candidate space, or None.

    ``vlink`` needs ``id``, ``demand`` (Gbps) and ``bsr`` (percent). The state is
    only probed; committing the returned ranges is the caller's job.
    """
    trace = trace if trace is not None else EmbedTrace()
    if eps is None:
        eps = params.eps if params.eps is not None else default_eps(params.q, 1, state.slice_count, 1)
    paths = candidates.paths
    demand = Fraction(vlink.demand)
    bsr = Fraction(vlink.bsr)
    q = params.q
    costs = _PathCosts(paths, table, q, state)
    rates = table.rates
    max_rate = table.max_rate
    trace.groups = len(groups)
    if not groups or demand <= 0:
        return None

    # shares are kept as integers in units of 1/scale Gbps so the DFS avoids Fraction math
    frac_shares = [
        {d: Fraction(d) if g.size == 1 else group_path_rate(d, g.size, bsr) for d in rates} for g in groups
    ]
    scale = demand.denominator
    for per_rate in frac_shares:
        for share in per_rate.values():
            scale = math.lcm(scale, share.denominator)
    shares = [{d: int(share * scale) for d, share in per_rate.items()} for per_rate in frac_shares]
    scaled_rates = [r * scale for r in rates]

    def floor_scaled(pi: int, x: int) -> int | None:
        i = bisect.bisect_left(scaled_rates, x)
        return None if i == len(rates) else costs.floor_at(pi, rates[i])

    all_links = sorted({l for p in paths for l in p.links})
    best: list = [None, None]  # [(cost, splits), VLinkEmbedding]
    seen_maps: set = set()

    def beats(key) -> bool:
        return best[0] is None or key < best[0]

    def evaluate(acc: dict[int, Fraction]) -> None:
        cons = consolidate(list(acc.items()), table)
        if cons is None:
            return
        map_key = tuple(sorted(cons.items()))
        if map_key in seen_maps:
            return
        seen_maps.add(map_key)
        trace.maps += 1
        order = sorted(cons)
        lists = [costs.options(pi, cons[pi]) for pi in order]
        if any(not l for l in lists):
            return
        start = tuple(0 for _ in lists)
        key0 = (sum(l[0][0] for l in lists), sum(l[0][1] for l in lists))
        if not beats(key0):
            trace.pruned += 1
            return
        heap = [(key0, start)]
        visited = {start}
        attempts = 0
        while heap:
            key, idx = heapq.heappop(heap)
            if not beats(key):
                return
            for axis, lst in enumerate(lists):
                j = idx[axis]
                if j + 1 < len(lst):
                    nxt = idx[:axis] + (j + 1,) + idx[axis + 1 :]
                    if nxt not in visited:
                        visited.add(nxt)
                        nkey = (key[0] + lst[j + 1][0] - lst[j][0], key[1] + lst[j + 1][1] - lst[j][1])
                        heapq.heappush(heap, (nkey, nxt))
            if key[1] > q:
                continue
            trace.plans += 1
            entries: list[tuple[int, int]] = []
            for axis, pi in enumerate(order):
                for r in lists[axis][idx[axis]][2]:
                    entries.append((pi, r))
            if not fits_links(entries):
                continue
            plan = [(paths[pi], r) for pi, r in entries]
            trace.mdp_calls += 1
            res = mdp(plan, table, state, config_for=lambda i: costs.config(*entries[i]))
            if res is None:
                trace.mdp_failures += 1
                attempts += 1
                if params.mdp_limit is not None and attempts >= params.mdp_limit:
                    return
                continue
            splits = tuple(
                Split(paths[pi], pi, cfg, rng[0], rng[1])
                for (pi, _), cfg, rng in zip(entries, res.configs, res.ranges)
            )
            if not survives(splits, demand, bsr, all_links):
                continue
            best[0] = key
            best[1] = VLinkEmbedding(vlink.id, splits, eps)
            return

    free_on = [state.slice_count - bin(state.mask(l)).count("1") for l in range(state.link_count)]

    def fits_links(entries) -> bool:
        # the plan's windows on each link must fit in that link's free slices
        load: dict[int, int] = {}
        for pi, r in entries:
            n = costs.config(pi, r).slice_count
            for l in paths[pi].links:
                load[l] = load.get(l, 0) + n
        return all(v <= free_on[l] for l, v in load.items())

    n_groups = len(groups)
    cap = max_rate * scale
    # paths that groups gi.. can still load
    suffix_paths: list[frozenset] = [frozenset()] * (n_groups + 1)
    for gi in range(n_groups - 1, -1, -1):
        suffix_paths[gi] = suffix_paths[gi + 1] | frozenset(groups[gi].members)
    scaled_d = [(d, d * scale) for d in rates]
    min_s = rates[0] * scale

    def room_left(gi: int, acc: dict[int, int]) -> int:
        # any group puts at least its rate onto its paths; each path tops out at max rate
        # and at most q distinct paths may be used
        future = suffix_paths[gi]
        room = sum(cap - x for pi, x in acc.items() if pi in future)
        fresh = min(len(future) - sum(1 for pi in acc if pi in future), q - len(acc))
        return room + max(fresh, 0) * cap

    def dfs(gi: int, rem: int, acc: dict[int, int], lb: int) -> None:
        # rem, acc: scaled by ``scale``; lb: sum of per-path cost floors
        trace.dfs_nodes += 1
        if rem == 0:
            evaluate({pi: Fraction(x, scale) for pi, x in acc.items()})
            return
        if gi == n_groups or room_left(gi, acc) < rem:
            trace.pruned += 1
            return
        g = groups[gi]
        for d, ds in scaled_d:
            if ds > rem:
                break
            left = rem - ds
            if 0 < left < min_s:
                continue
            share = shares[gi][d]
            nacc = dict(acc)
            nlb = lb
            for pi in g.members:
                old = nacc.get(pi)
                new = share if old is None else old + share
                nacc[pi] = new
                f = floor_scaled(pi, new)
                if f is None:
                    nlb = None
                    break
                nlb += f - (0 if old is None else floor_scaled(pi, old))
            if nlb is None or len(nacc) > q:
                trace.pruned += 1
                continue
            if not beats((nlb, len(nacc))):
                trace.pruned += 1
                continue
            dfs(gi + 1, left, nacc, nlb)
        dfs(gi + 1, rem, acc, lb)

    dfs(0, int(demand * scale), {}, 0)
    if log.isEnabledFor(logging.DEBUG):
        log.debug("vlink %s: %s", vlink.id, trace)
    return best[1]


def groups_for(vlink, candidates: Candidates, params: EmbedParams) -> list[DisjointGroup]:
    return enumerate_groups(candidates.paths, params.sigma, allow_single=Fraction(vlink.bsr) == 0)


def plan_entries(splits: Sequence[Split]) -> list[tuple[int, int]]:
    return [(s.path_index, s.rate) for s in splits]


def distinct_permutations(items: Sequence) -> list[tuple]:
    """Distinct orderings of a multiset, in lexicographic order."""
    return sorted(set(itertools.permutations(items)))
