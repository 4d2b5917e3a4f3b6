"""Substrate EON graph, document loading, k-shortest paths and candidate precompute."""

from __future__ import annotations

import heapq
import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Iterable, Mapping

from .errors import ParseError, ValidationError

if TYPE_CHECKING:
    from .orchestrator import VnRequest
    from .reach import ReachTable, TransmissionConfig

# Lengths are compared after rounding so that 100+200 and 200+100 tie exactly.
_LEN_DIGITS = 9


@dataclass(frozen=True)
class SLink:
    id: int
    a: str
    b: str
    length_km: float

    def other(self, node: str) -> str:
        return self.b if node == self.a else self.a


@dataclass(frozen=True)
class SPath:
    """A loopless substrate path, stored both as node and link sequences."""

    nodes: tuple[str, ...]
    links: tuple[int, ...]
    length_km: float

    @property
    def hop_count(self) -> int:
        return len(self.links)

    @property
    def src(self) -> str:
        return self.nodes[0]

    @property
    def dst(self) -> str:
        return self.nodes[-1]

    @property
    def link_set(self) -> frozenset[int]:
        return frozenset(self.links)

    def uses(self, link_id: int) -> bool:
        return link_id in self.links

    def sort_key(self) -> tuple:
        return (round(self.length_km, _LEN_DIGITS), self.hop_count, self.nodes)

    def __str__(self) -> str:
        return "-".join(self.nodes)


@dataclass
class EonTopology:
    nodes: list[str]
    links: list[SLink]
    slice_count: int
    name: str = ""
    _adj: dict[str, list[SLink]] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        self.validate()
        self._adj = {n: [] for n in self.nodes}
        for link in self.links:
            self._adj[link.a].append(link)
            self._adj[link.b].append(link)

    def validate(self) -> None:
        if len(set(self.nodes)) != len(self.nodes):
            raise ValidationError("duplicate node id")
        if self.slice_count < 1:
            raise ValidationError(f"slice_count must be positive, got {self.slice_count}")
        known = set(self.nodes)
        seen: set[frozenset[str]] = set()
        for i, link in enumerate(self.links):
            if link.id != i:
                raise ValidationError(f"link ids must follow file order, got {link.id} at {i}")
            if link.a not in known or link.b not in known:
                raise ValidationError(f"link {link.id} references unknown node")
            if link.a == link.b:
                raise ValidationError(f"self-loop on node {link.a!r}")
            pair = frozenset((link.a, link.b))
            if pair in seen:
                raise ValidationError(f"duplicate link {link.a}-{link.b}")
            seen.add(pair)
            if not link.length_km > 0:
                raise ValidationError(f"link {link.a}-{link.b} has nonpositive length")

    def neighbors(self, node: str) -> list[SLink]:
        return self._adj[node]

    def link(self, link_id: int) -> SLink:
        return self.links[link_id]

    def link_between(self, a: str, b: str) -> SLink | None:
        for link in self._adj.get(a, ()):
            if link.other(a) == b:
                return link
        return None

    def path_from_nodes(self, nodes: Iterable[str]) -> SPath:
        nodes = tuple(nodes)
        links = []
        for u, v in zip(nodes, nodes[1:]):
            link = self.link_between(u, v)
            if link is None:
                raise ValidationError(f"no link between {u} and {v}")
            links.append(link.id)
        return SPath(nodes, tuple(links), sum(self.links[i].length_km for i in links))

    def path_from_links(self, src: str, link_ids: Iterable[int]) -> SPath:
        """Rebuild an SPath from a link sequence; raises if it is not a loopless walk."""
        nodes = [src]
        link_ids = tuple(link_ids)
        for lid in link_ids:
            if not 0 <= lid < len(self.links):
                raise ValidationError(f"unknown link id {lid}")
            link = self.links[lid]
            if nodes[-1] not in (link.a, link.b):
                raise ValidationError(f"link {lid} is not adjacent to {nodes[-1]}")
            nodes.append(link.other(nodes[-1]))
        if len(set(nodes)) != len(nodes):
            raise ValidationError("path repeats a node")
        return SPath(tuple(nodes), link_ids, sum(self.links[i].length_km for i in link_ids))

    def to_document(self) -> dict:
        return {
            "name": self.name,
            "nodes": list(self.nodes),
            "slice_count": self.slice_count,
            "links": [{"a": l.a, "b": l.b, "length_km": l.length_km} for l in self.links],
        }

    def with_slice_count(self, slice_count: int) -> "EonTopology":
        return EonTopology(list(self.nodes), list(self.links), slice_count, self.name)


def topology_from_document(doc: Mapping) -> EonTopology:
    try:
        nodes = [str(n) for n in doc["nodes"]]
        slice_count = int(doc["slice_count"])
        links = [
            SLink(i, str(row["a"]), str(row["b"]), float(row["length_km"]))
            for i, row in enumerate(doc["links"])
        ]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed topology document: {exc}") from exc
    return EonTopology(nodes, links, slice_count, str(doc.get("name", "")))


def load_topology(source: str | Path | Mapping) -> EonTopology:
    """Load a topology from a JSON file path, a JSON string, or a parsed mapping."""
    if isinstance(source, Mapping):
        return topology_from_document(source)
    text = _read_source(source)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"topology document is not valid JSON: {exc}") from exc
    return topology_from_document(doc)


def _read_source(source: str | Path) -> str:
    if isinstance(source, Path):
        return source.read_text()
    stripped = source.lstrip()
    if stripped.startswith("{") or stripped.startswith("["):
        return source
    return Path(source).read_text()


# --- k shortest paths -------------------------------------------------------


def _best_path(
    topo: EonTopology,
    src: str,
    dst: str,
    banned_nodes: set[str],
    banned_links: set[int],
) -> SPath | None:
    """Dijkstra under the (length, hops, node sequence) total order."""
    if src in banned_nodes:
        return None
    heap: list[tuple] = [(0.0, 0, (src,), ())]
    settled: set[str] = set()
    while heap:
        length, hops, nodes, links = heapq.heappop(heap)
        node = nodes[-1]
        if node in settled:
            continue
        settled.add(node)
        if node == dst:
            return SPath(nodes, links, length)
        for link in topo.neighbors(node):
            if link.id in banned_links:
                continue
            nxt = link.other(node)
            if nxt in settled or nxt in banned_nodes or nxt in nodes:
                continue
            heapq.heappush(
                heap,
                (round(length + link.length_km, _LEN_DIGITS), hops + 1, nodes + (nxt,), links + (link.id,)),
            )
    return None


def k_shortest_paths(topo: EonTopology, src: str, dst: str, k: int) -> list[SPath]:
    """Yen's loopless k-shortest paths, ordered by (length, hops, node sequence).

    Returns fewer than ``k`` paths only when fewer loopless paths exist; an empty
    list means the pair is disconnected.
    """
    if src not in topo._adj or dst not in topo._adj:
        raise ValidationError(f"unknown node id in ({src!r}, {dst!r})")
    if src == dst:
        raise ValidationError("src and dst must differ")
    if k < 1:
        raise ValidationError("k must be positive")

    first = _best_path(topo, src, dst, set(), set())
    if first is None:
        return []
    found = [first]
    candidates: list[tuple] = []
    queued: set[tuple[str, ...]] = {first.nodes}

    while len(found) < k:
        last = found[-1]
        for i in range(len(last.nodes) - 1):
            spur = last.nodes[i]
            root_nodes = last.nodes[: i + 1]
            root_links = last.links[:i]
            banned_links = {p.links[i] for p in found if p.nodes[: i + 1] == root_nodes}
            banned_nodes = set(root_nodes[:-1])
            tail = _best_path(topo, spur, dst, banned_nodes, banned_links)
            if tail is None:
                continue
            nodes = root_nodes + tail.nodes[1:]
            if nodes in queued:
                continue
            links = root_links + tail.links
            path = SPath(nodes, links, round(sum(topo.links[l].length_km for l in links), _LEN_DIGITS))
            queued.add(nodes)
            heapq.heappush(candidates, (path.sort_key(), path))
        if not candidates:
            break
        _, best = heapq.heappop(candidates)
        found.append(best)
    return [SPath(p.nodes, p.links, sum(topo.links[l].length_km for l in p.links)) for p in found]


# --- candidate precompute ---------------------------------------------------


@dataclass(frozen=True)
class Candidates:
    """Per-VLink candidate paths and, per path, its reach-admissible configs."""

    paths: tuple[SPath, ...]
    admissible: tuple[tuple["TransmissionConfig", ...], ...]

    @property
    def all_configs(self) -> tuple["TransmissionConfig", ...]:
        seen: dict[int, "TransmissionConfig"] = {}
        for configs in self.admissible:
            for cfg in configs:
                seen.setdefault(cfg.row_id, cfg)
        return tuple(seen[r] for r in sorted(seen))

    def __len__(self) -> int:
        return len(self.paths)


def precompute_candidates(
    topo: EonTopology, vn: "VnRequest", reach: "ReachTable", k: int
) -> dict[str, Candidates]:
    result: dict[str, Candidates] = {}
    for vlink in vn.vlinks:
        a = vn.mapping[vlink.a]
        b = vn.mapping[vlink.b]
        for node in (a, b):
            if node not in topo._adj:
                raise ValidationError(f"VNode mapped to unknown substrate node {node!r}")
        paths = tuple(k_shortest_paths(topo, a, b, k))
        admissible = tuple(reach.admissible(p.length_km) for p in paths)
        result[vlink.id] = Candidates(paths, admissible)
    return result


# --- SNDlib native conversion -----------------------------------------------

_SECTION = re.compile(r"^\s*(\w+)\s*\(\s*$")
_NODE = re.compile(r"^\s*(\S+)\s*\(\s*([-\d.eE+]+)\s+([-\d.eE+]+)\s*\)")
_LINK = re.compile(r"^\s*(\S+)\s*\(\s*(\S+)\s+(\S+)\s*\)")


def haversine_km(lon1: float, lat1: float, lon2: float, lat2: float) -> float:
    r = 6371.0
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dp = p2 - p1
    dl = math.radians(lon2 - lon1)
    h = math.sin(dp / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2) ** 2
    return 2 * r * math.asin(math.sqrt(h))


def parse_sndlib(text: str) -> tuple[dict[str, tuple[float, float]], list[tuple[str, str]]]:
    """Return node coordinates (lon, lat) and undirected link endpoints from SNDlib native text."""
    nodes: dict[str, tuple[float, float]] = {}
    links: list[tuple[str, str]] = []
    section = None
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        m = _SECTION.match(line)
        if m and section is None:
            section = m.group(1).upper()
            continue
        if line.strip() == ")":
            section = None
            continue
        if section == "NODES":
            m = _NODE.match(line)
            if not m:
                raise ParseError(f"bad NODES line: {raw!r}")
            nodes[m.group(1)] = (float(m.group(2)), float(m.group(3)))
        elif section == "LINKS":
            m = _LINK.match(line)
            if not m:
                raise ParseError(f"bad LINKS line: {raw!r}")
            links.append((m.group(2), m.group(3)))
    if not nodes:
        raise ParseError("no NODES section found")
    return nodes, links


def convert_sndlib(text: str, slice_count: int, name: str = "", length_scale: float = 1.0) -> dict:
    """Convert SNDlib native text to the topology document schema.

    Link lengths are great-circle distances between node coordinates times
    ``length_scale``; parallel links between the same pair are merged.
    """
    nodes, links = parse_sndlib(text)
    out_links = []
    seen: set[frozenset[str]] = set()
    for a, b in links:
        if a not in nodes or b not in nodes:
            raise ParseError(f"link references unknown node {a}-{b}")
        pair = frozenset((a, b))
        if a == b or pair in seen:
            continue
        seen.add(pair)
        length = haversine_km(*nodes[a], *nodes[b]) * length_scale
        out_links.append({"a": a, "b": b, "length_km": round(length, 1)})
    return {"name": name, "nodes": list(nodes), "slice_count": slice_count, "links": out_links}
