"""Whole-VN embedding: ordering, sequential per-VLink solves, commits and reject-with-rollback.

Also holds the VN request model, the embedding output document and an
independent constraint validator that works from raw split records only.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Hashable, Mapping, Sequence

from .errors import ParseError, ValidationError
from .ordering import AuxGraph, VLinkOrder, build_aux_graph, get_vlink_order
from .reach import ReachTable
from .spectrum import SpectrumState, commit, rollback
from .topology import Candidates, EonTopology, precompute_candidates
from .vlink_embed import (
    EmbedParams,
    EmbedTrace,
    VLinkEmbedding,
    default_eps,
    find_embedding,
    groups_for,
)

CONSTRAINTS = ("demand", "max-split", "slice-count", "non-overlap", "contiguity", "survivability")


@dataclass(frozen=True)
class VLink:
    id: str
    a: str
    b: str
    demand: int  # Gbps
    bsr: int  # percent


@dataclass(frozen=True)
class VnRequest:
    vnodes: dict[str, str]  # VNode id -> substrate node
    vlinks: tuple[VLink, ...]
    name: str = "vn"

    def __post_init__(self) -> None:
        ids = [v.id for v in self.vlinks]
        if len(set(ids)) != len(ids):
            raise ValidationError("duplicate VLink id")
        for v in self.vlinks:
            if v.a not in self.vnodes or v.b not in self.vnodes:
                raise ValidationError(f"VLink {v.id} has an unmapped endpoint")
            if v.a == v.b:
                raise ValidationError(f"VLink {v.id} endpoints must differ")
            if not v.demand > 0:
                raise ValidationError(f"VLink {v.id} demand must be positive")
            if not 0 <= v.bsr <= 100:
                raise ValidationError(f"VLink {v.id} bsr must be within 0..100")

    @property
    def mapping(self) -> dict[str, str]:
        return self.vnodes

    def vlink(self, vid: str) -> VLink:
        for v in self.vlinks:
            if v.id == vid:
                return v
        raise KeyError(vid)

    def to_document(self) -> dict:
        return {
            "name": self.name,
            "vnodes": [{"id": k, "mapped_to": v} for k, v in self.vnodes.items()],
            "vlinks": [
                {"id": v.id, "a": v.a, "b": v.b, "demand_gbps": v.demand, "bsr_pct": v.bsr} for v in self.vlinks
            ],
        }


def vn_from_document(doc: Mapping) -> VnRequest:
    try:
        vnodes = {str(n["id"]): str(n["mapped_to"]) for n in doc["vnodes"]}
        vlinks = tuple(
            VLink(str(v["id"]), str(v["a"]), str(v["b"]), _number(v["demand_gbps"]), _number(v["bsr_pct"]))
            for v in doc["vlinks"]
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed VN document: {exc}") from exc
    return VnRequest(vnodes, vlinks, str(doc.get("name", "vn")))


def _number(x):
    f = Fraction(str(x))
    return int(f) if f.denominator == 1 else f


def load_vn(source: str | Path | Mapping) -> VnRequest:
    if isinstance(source, Mapping):
        return vn_from_document(source)
    try:
        text = source.read_text() if isinstance(source, Path) else (
            source if source.lstrip().startswith("{") else Path(source).read_text()
        )
        return vn_from_document(json.loads(text))
    except json.JSONDecodeError as exc:
        raise ParseError(f"VN document is not valid JSON: {exc}") from exc


def random_vn(
    topo: EonTopology,
    seed: int,
    n_vnodes: int = 4,
    n_vlinks: int = 5,
    demands: Sequence[int] = tuple(range(100, 1001, 100)),
    bsr: int | Sequence[int] = 100,
    name: str | None = None,
) -> VnRequest:
    """Seeded VN with a random injective node mapping and distinct random VLink endpoints."""
    rng = random.Random(seed)
    if n_vnodes > len(topo.nodes):
        raise ValidationError("more VNodes than substrate nodes")
    pairs = [(i, j) for i in range(n_vnodes) for j in range(i + 1, n_vnodes)]
    if n_vlinks > len(pairs):
        raise ValidationError("more VLinks than VNode pairs")
    hosts = rng.sample(list(topo.nodes), n_vnodes)
    vnodes = {f"v{i}": hosts[i] for i in range(n_vnodes)}
    chosen = sorted(rng.sample(pairs, n_vlinks))
    vlinks = []
    for idx, (i, j) in enumerate(chosen):
        b = bsr if isinstance(bsr, int) else rng.choice(list(bsr))
        vlinks.append(VLink(f"e{idx}", f"v{i}", f"v{j}", rng.choice(list(demands)), b))
    return VnRequest(vnodes, tuple(vlinks), name or f"vn{seed}")


# --- embedding ------------------------------------------------------------------


@dataclass(frozen=True)
class Rejection:
    vn: str
    vlink_id: str | None
    reason: str  # "no candidates" | "no feasible plan" | "no spectrum"

    accepted = False


@dataclass
class VnEmbedding:
    vn: VnRequest
    order: VLinkOrder
    vlinks: dict[str, VLinkEmbedding]
    state: SpectrumState
    eps: Fraction
    traces: dict[str, EmbedTrace] = field(default_factory=dict)

    accepted = True

    @property
    def objective(self) -> Fraction:
        return sum((e.objective for e in self.vlinks.values()), Fraction(0))

    @property
    def ssu(self) -> int:
        return sum(e.slice_cost for e in self.vlinks.values())

    @property
    def split_count(self) -> int:
        return sum(len(e.splits) for e in self.vlinks.values())


def vn_eps(topo: EonTopology, vn: VnRequest, q: int) -> Fraction:
    # the longest possible loopless path has |V|-1 hops
    return default_eps(q, max(len(vn.vlinks), 1), topo.slice_count, len(topo.nodes) - 1)


def owner_tag(vn: VnRequest, vlink_id: str, split_index: int) -> tuple:
    return (vn.name, vlink_id, split_index)


def embed_vn(
    topo: EonTopology,
    reach: ReachTable,
    vn: VnRequest,
    state: SpectrumState,
    params: EmbedParams | None = None,
    candidates: Mapping[str, Candidates] | None = None,
) -> VnEmbedding | Rejection:
    """Embed all VLinks in commonality order; commits go into ``state``.

    On the first VLink that cannot be embedded every commit of this VN is rolled
    back and a Rejection naming that VLink is returned.
    """
    params = params or EmbedParams()
    if candidates is None:
        candidates = precompute_candidates(topo, vn, reach, params.k)
    eps = params.eps if params.eps is not None else vn_eps(topo, vn, params.q)
    order = get_vlink_order(build_aux_graph({v.id: candidates[v.id] for v in vn.vlinks}))
    done: dict[str, VLinkEmbedding] = {}
    traces: dict[str, EmbedTrace] = {}
    owners: list = []

    def reject(vid: str, reason: str) -> Rejection:
        for owner in owners:
            rollback(state, owner)
        return Rejection(vn.name, vid, reason)

    for vid in order.order:
        vlink = vn.vlink(vid)
        cands = candidates[vid]
        if not cands.paths:
            return reject(vid, "no candidates")
        trace = EmbedTrace()
        traces[vid] = trace
        groups = groups_for(vlink, cands, params)
        emb = find_embedding(vlink, cands, groups, reach, state, params, eps, trace)
        if emb is None:
            # would an empty substrate have carried it? then spectrum is what ran out
            empty = SpectrumState(state.link_count, state.slice_count)
            fits_empty = find_embedding(vlink, cands, groups, reach, empty, params, eps) is not None
            return reject(vid, "no spectrum" if fits_empty else "no feasible plan")
        for i, split in enumerate(emb.splits):
            owner = owner_tag(vn, vid, i)
            commit(state, split.path, (split.s_b, split.s_t), owner)
            owners.append(owner)
        done[vid] = emb
    return VnEmbedding(vn, order, done, state, eps, traces)


# --- documents --------------------------------------------------------------------


def _frac_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)


def embedding_to_document(result: VnEmbedding | Rejection, topo: EonTopology | None = None) -> dict:
    if isinstance(result, Rejection):
        return {"vn": result.vn, "accepted": False, "rejected_vlink": result.vlink_id, "reason": result.reason}
    vlinks = []
    for v in result.vn.vlinks:
        emb = result.vlinks[v.id]
        vlinks.append(
            {
                "id": v.id,
                "splits": [
                    {
                        "path": list(s.path.links),
                        "nodes": list(s.path.nodes),
                        "rate_gbps": s.rate,
                        "config_row": s.config.row_id,
                        "s_b": s.s_b,
                        "s_t": s.s_t,
                    }
                    for s in emb.splits
                ],
            }
        )
    from .experiments import compute_metrics  # local: experiments imports this module

    m = compute_metrics(result, result.vn)
    return {
        "vn": result.vn.name,
        "accepted": True,
        "order": list(result.order.order),
        "commonality_index": result.order.commonality_index,
        "objective": _frac_str(result.objective),
        "eps": _frac_str(result.eps),
        "ssu": result.ssu,
        "vlinks": vlinks,
        "metrics": {
            "ssu": m.ssu,
            "overhead": _frac_str(m.overhead),
            "max_disjoint": _frac_str(m.max_disjoint),
            "max_splits": _frac_str(m.max_splits),
        },
    }


def dumps_document(doc: Mapping) -> str:
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


# --- validator ----------------------------------------------------------------------


@dataclass
class ValidationReport:
    failures: dict[str, list[str]] = field(default_factory=lambda: {c: [] for c in CONSTRAINTS})

    def fail(self, constraint: str, witness: str) -> None:
        self.failures[constraint].append(witness)

    def passed(self, constraint: str) -> bool:
        return not self.failures[constraint]

    @property
    def ok(self) -> bool:
        return all(not w for w in self.failures.values())

    @property
    def failed(self) -> list[str]:
        return [c for c in CONSTRAINTS if self.failures[c]]

    def render(self) -> str:
        lines = []
        for c in CONSTRAINTS:
            w = self.failures[c]
            lines.append(f"{c}: {'pass' if not w else 'FAIL'}")
            lines.extend(f"  - {x}" for x in w[:10])
        return "\n".join(lines) + "\n"


def validate(
    embedding: VnEmbedding | Mapping,
    topo: EonTopology,
    reach: ReachTable,
    vn: VnRequest,
    q: int | None = None,
    background: SpectrumState | None = None,
) -> ValidationReport:
    """Check every constraint from the raw split records of an embedding document.

    ``background`` holds spectrum committed by other VNs; slices owned by this
    VN inside it are ignored.
    """
    doc = embedding_to_document(embedding) if isinstance(embedding, VnEmbedding) else embedding
    rep = ValidationReport()
    S = topo.slice_count
    by_id = {v["id"]: v for v in doc.get("vlinks", [])}
    usage: dict[tuple[int, int], list[str]] = {}
    if background is not None:
        for owner in background.owners():
            if isinstance(owner, tuple) and owner and owner[0] == vn.name:
                continue
            for links, sb, st in background.ranges_of(owner):
                for lid in links:
                    for s in range(sb, st + 1):
                        usage.setdefault((lid, s), []).append(f"background {owner!r}")

    for v in vn.vlinks:
        rec = by_id.get(v.id)
        splits = rec["splits"] if rec else []
        if q is not None and not 1 <= len(splits) <= q:
            rep.fail("max-split", f"{v.id}: {len(splits)} splits, limit {q}")
        elif not splits:
            rep.fail("max-split", f"{v.id}: no splits")
        total = Fraction(0)
        link_rates: list[tuple[frozenset, Fraction]] = []
        src, dst = vn.vnodes[v.a], vn.vnodes[v.b]
        for i, s in enumerate(splits):
            tag = f"{v.id}#{i}"
            rate = Fraction(s["rate_gbps"])
            total += rate
            links = [int(x) for x in s["path"]]
            link_rates.append((frozenset(links), rate))
            sb, st = int(s["s_b"]), int(s["s_t"])
            # path shape and slice window
            length = None
            try:
                path = topo.path_from_links(src, links)
                if not links or path.dst != dst:
                    raise ValidationError("wrong endpoints")
                length = path.length_km
            except ValidationError as exc:
                rep.fail("contiguity", f"{tag}: path {links} is not a {src}-{dst} path ({exc})")
            if not 1 <= sb <= st <= S:
                rep.fail("contiguity", f"{tag}: range [{sb},{st}] outside 1..{S}")
            # config consistency, reach and slice count
            try:
                cfg = reach.by_row(int(s["config_row"]))
            except ValidationError:
                rep.fail("slice-count", f"{tag}: config row {s['config_row']} not in table")
                cfg = None
            if cfg is not None:
                if cfg.rate != rate:
                    rep.fail("slice-count", f"{tag}: rate {rate} differs from config rate {cfg.rate}")
                if st - sb + 1 != cfg.slice_count:
                    rep.fail("slice-count", f"{tag}: range [{sb},{st}] holds {st - sb + 1} slices, config needs {cfg.slice_count}")
                if length is not None and cfg.reach_km < length:
                    rep.fail("slice-count", f"{tag}: reach {cfg.reach_km} km < path length {length} km")
            for lid in links:
                if 0 <= lid < len(topo.links):
                    for s_ in range(max(sb, 1), min(st, S) + 1):
                        usage.setdefault((lid, s_), []).append(tag)
        if total < v.demand:
            rep.fail("demand", f"{v.id}: allocated {total} < demand {v.demand}")
        need = Fraction(v.bsr) * Fraction(v.demand) / 100
        for lid in range(len(topo.links)):
            alive = sum((r for ls, r in link_rates if lid not in ls), Fraction(0))
            if alive < need:
                rep.fail("survivability", f"{v.id}: failure of link {lid} leaves {alive} < {need}")
    for (lid, s), owners in sorted(usage.items()):
        if len(owners) > 1:
            rep.fail("non-overlap", f"link {lid} slice {s} used by {', '.join(owners)}")
    return rep
