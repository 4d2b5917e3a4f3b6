"""Random instance generators shared by the tests."""

from __future__ import annotations

import random
from importlib import resources

from eonvne.orchestrator import VLink, VnRequest
from eonvne.topology import load_topology

DATA = resources.files("eonvne.data")


def fixture_topology(name: str):
    return load_topology(DATA.joinpath(f"{name}.json").read_text())


def random_topology(rng: random.Random, n_nodes: int, extra: int, slice_count: int, lo: int = 60, hi: int = 400):
    nodes = [f"n{i}" for i in range(n_nodes)]
    pairs = set()
    for i in range(1, n_nodes):
        pairs.add((rng.randrange(i), i))
    candidates = [(i, j) for i in range(n_nodes) for j in range(i + 1, n_nodes) if (i, j) not in pairs]
    rng.shuffle(candidates)
    pairs.update(candidates[:extra])
    links = [{"a": nodes[i], "b": nodes[j], "length_km": rng.randint(lo, hi)} for i, j in sorted(pairs)]
    return load_topology({"nodes": nodes, "slice_count": slice_count, "links": links})


def random_vn(rng: random.Random, topo, n_vlinks: int, demands, bsrs, name: str = "vn") -> VnRequest:
    n_vnodes = min(len(topo.nodes), n_vlinks + 1)
    hosts = rng.sample(list(topo.nodes), n_vnodes)
    vnodes = {f"v{i}": h for i, h in enumerate(hosts)}
    pairs = [(i, j) for i in range(n_vnodes) for j in range(i + 1, n_vnodes)]
    chosen = rng.sample(pairs, min(n_vlinks, len(pairs)))
    vlinks = tuple(
        VLink(f"e{x}", f"v{i}", f"v{j}", rng.choice(demands), rng.choice(bsrs)) for x, (i, j) in enumerate(chosen)
    )
    return VnRequest(vnodes, vlinks, name)


def tiny_instance(seed: int, bsrs=(0, 50, 66, 100), demands=(100, 200, 300, 400, 500, 600)):
    """<= 2 VLinks, |S| <= 24 on a 4..6 node substrate."""
    rng = random.Random(seed)
    n = rng.randint(4, 6)
    topo = random_topology(rng, n, rng.randint(2, 4), rng.choice([12, 16, 20, 24]))
    vn = random_vn(rng, topo, rng.randint(1, 2), demands, bsrs, name=f"t{seed}")
    return topo, vn
