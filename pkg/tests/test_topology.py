import random

import networkx as nx
import pytest

from _corpus import DATA, random_topology
from eonvne.errors import ParseError, ValidationError
from eonvne.orchestrator import VLink, VnRequest
from eonvne.reach import shipped_table
from eonvne.topology import (
    convert_sndlib,
    k_shortest_paths,
    load_topology,
    parse_sndlib,
    precompute_candidates,
)


def triangle(slices=40):
    return load_topology(
        {
            "nodes": ["A", "B", "C"],
            "slice_count": slices,
            "links": [
                {"a": "A", "b": "B", "length_km": 100},
                {"a": "B", "b": "C", "length_km": 100},
                {"a": "A", "b": "C", "length_km": 100},
            ],
        }
    )


def test_load_triangle():
    topo = triangle()
    assert len(topo.links) == 3 and topo.slice_count == 40
    assert [l.id for l in topo.links] == [0, 1, 2]


def test_load_from_json_string_and_file(tmp_path):
    doc = triangle().to_document()
    p = tmp_path / "t.json"
    import json

    p.write_text(json.dumps(doc))
    assert load_topology(str(p)).to_document() == doc
    assert load_topology(json.dumps(doc)).to_document() == doc


@pytest.mark.parametrize(
    "links, exc",
    [
        ([{"a": "A", "b": "A", "length_km": 10}], ValidationError),
        ([{"a": "A", "b": "B", "length_km": 10}, {"a": "B", "b": "A", "length_km": 20}], ValidationError),
        ([{"a": "A", "b": "B", "length_km": 0}], ValidationError),
        ([{"a": "A", "b": "Z", "length_km": 5}], ValidationError),
        ([{"a": "A", "length_km": 5}], ParseError),
    ],
)
def test_load_rejects_bad_links(links, exc):
    with pytest.raises(exc):
        load_topology({"nodes": ["A", "B"], "slice_count": 8, "links": links})


def test_load_rejects_malformed_json():
    with pytest.raises(ParseError):
        load_topology("{not json")


def test_nobel_germany_size(nobel):
    assert len(nobel.nodes) == 17 and len(nobel.links) == 26
    assert nobel.slice_count == 48


def test_nobel_json_matches_conversion(nobel):
    text = DATA.joinpath("nobel_germany.txt").read_text()
    doc = convert_sndlib(text, 48, "nobel-germany")
    assert load_topology(doc).to_document() == nobel.to_document()
    coords, links = parse_sndlib(text)
    assert len(coords) == 17 and len(links) == 26


def test_triangle_k3_has_two_paths():
    paths = k_shortest_paths(triangle(), "A", "C", 3)
    assert [p.nodes for p in paths] == [("A", "C"), ("A", "B", "C")]


def test_diamond_three_two_hop_paths(diamond_topo):
    paths = k_shortest_paths(diamond_topo, "A", "C", 5)
    assert {p.nodes for p in paths} == {("A", "B", "C"), ("A", "D", "C"), ("A", "E", "C")}
    assert all(p.hop_count == 2 and p.length_km == 200 for p in paths)


def test_unknown_node_and_same_endpoints(diamond_topo):
    with pytest.raises(ValidationError):
        k_shortest_paths(diamond_topo, "A", "Q", 2)
    with pytest.raises(ValidationError):
        k_shortest_paths(diamond_topo, "A", "A", 2)


def test_disconnected_pair_is_empty():
    topo = load_topology(
        {"nodes": ["A", "B", "C", "D"], "slice_count": 8,
         "links": [{"a": "A", "b": "B", "length_km": 1}, {"a": "C", "b": "D", "length_km": 1}]}
    )
    assert k_shortest_paths(topo, "A", "D", 3) == []


def _oracle_paths(topo, src, dst):
    g = nx.Graph()
    for l in topo.links:
        g.add_edge(l.a, l.b, length=l.length_km)
    out = []
    for nodes in nx.all_simple_paths(g, src, dst):
        length = sum(g[u][v]["length"] for u, v in zip(nodes, nodes[1:]))
        out.append((round(length, 9), len(nodes) - 1, tuple(nodes)))
    return sorted(out)


@pytest.mark.parametrize("seed", range(25))
def test_k_shortest_matches_brute_force(seed):
    rng = random.Random(seed)
    # small integer lengths so ties between distinct paths actually occur
    topo = random_topology(rng, 8, rng.randint(3, 9), 16, lo=1, hi=4)
    src, dst = rng.sample(topo.nodes, 2)
    oracle = _oracle_paths(topo, src, dst)
    for k in (1, 3, 7, 15, 40):
        got = [(round(p.length_km, 9), p.hop_count, p.nodes) for p in k_shortest_paths(topo, src, dst, k)]
        assert got == oracle[:k]


@pytest.mark.parametrize("seed", range(10))
def test_paths_loopless_connected_and_prefix_stable(seed):
    rng = random.Random(100 + seed)
    topo = random_topology(rng, 9, 8, 16)
    src, dst = rng.sample(topo.nodes, 2)
    prev = None
    for k in range(1, 12):
        paths = k_shortest_paths(topo, src, dst, k)
        for p in paths:
            assert len(set(p.nodes)) == len(p.nodes) and p.hop_count >= 1
            for lid, (u, v) in zip(p.links, zip(p.nodes, p.nodes[1:])):
                assert {topo.links[lid].a, topo.links[lid].b} == {u, v}
            for lid in range(len(topo.links)):
                assert p.uses(lid) == (lid in p.links)
        if prev is not None:
            assert paths[: len(prev)] == prev
        prev = paths


def test_admissible_configs_are_reach_filter():
    rng = random.Random(7)
    table = shipped_table("Flex-AT")
    topo = random_topology(rng, 7, 5, 24, lo=100, hi=900)
    vn = VnRequest({"x": topo.nodes[0], "y": topo.nodes[-1]}, (VLink("e", "x", "y", 100, 0),))
    cands = precompute_candidates(topo, vn, table, 6)["e"]
    for path, adm in zip(cands.paths, cands.admissible):
        assert set(adm) == {c for c in table.configs if c.reach_km >= path.length_km}
    assert set(cands.all_configs) == set().union(*map(set, cands.admissible))


def test_reach_filter_example():
    from eonvne.reach import ReachTable, TransmissionConfig

    table = ReachTable(
        [TransmissionConfig(400, 64, "16QAM", 15, 800, 8, 0), TransmissionConfig(100, 32, "QPSK", 15, 1500, 4, 1)], 12.5
    )
    assert [c.rate for c in table.admissible(900)] == [100]


def test_precompute_rejects_unknown_mapping(diamond_topo, flex):
    vn = VnRequest({"x": "A", "y": "Nowhere"}, (VLink("e", "x", "y", 100, 0),))
    with pytest.raises(ValidationError):
        precompute_candidates(diamond_topo, vn, flex, 3)
