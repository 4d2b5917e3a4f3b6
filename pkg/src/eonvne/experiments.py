"""Per-VN metrics and the BSR / variant sweep harness writing CSV rows."""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Sequence

from .errors import ParseError, ValidationError
from .exact import ExactBudget, solve_exact, with_bsr
from .orchestrator import VnEmbedding, VnRequest, embed_vn, load_vn, random_vn
from .reach import load_reach_table
from .spectrum import SpectrumState
from .topology import SPath, load_topology
from .vlink_embed import EmbedParams

CSV_COLUMNS = (
    "instance", "variant", "bsr", "solver", "accepted", "ssu",
    "overhead", "max_disjoint", "max_splits", "cost_ratio", "runtime_ms",
)


@dataclass
class MetricsRow:
    instance: str = ""
    variant: str = ""
    bsr: object = ""
    solver: str = ""
    accepted: bool = False
    ssu: int | None = None
    overhead: Fraction | None = None
    max_disjoint: Fraction | None = None
    max_splits: Fraction | None = None
    cost_ratio: Fraction | None = None
    runtime_ms: float | None = None
    objective: Fraction | None = None

    def as_csv_row(self) -> list[str]:
        def num(x) -> str:
            if x is None:
                return ""
            if isinstance(x, Fraction):
                return f"{float(x):.6f}"
            return str(x)

        return [
            self.instance, self.variant, str(self.bsr), self.solver, "1" if self.accepted else "0",
            num(self.ssu), num(self.overhead), num(self.max_disjoint), num(self.max_splits),
            num(self.cost_ratio), "" if self.runtime_ms is None else f"{self.runtime_ms:.1f}",
        ]


def max_disjoint_paths(paths: Sequence[SPath]) -> int:
    """Largest pairwise link-disjoint subset of the distinct paths (exhaustive)."""
    distinct = list({p.links: p for p in paths}.values())
    sets = [p.link_set for p in distinct]
    best = 0

    def rec(i: int, chosen: list[frozenset]) -> None:
        nonlocal best
        best = max(best, len(chosen))
        if best == len(sets):
            return
        for j in range(i, len(sets)):
            if len(chosen) + len(sets) - j <= best:
                return
            if all(sets[j].isdisjoint(c) for c in chosen):
                chosen.append(sets[j])
                rec(j + 1, chosen)
                chosen.pop()

    rec(0, [])
    return best


def compute_metrics(embedding: VnEmbedding, vn: VnRequest) -> MetricsRow:
    n = len(vn.vlinks)
    overhead = Fraction(0)
    disjoint = 0
    splits = 0
    for v in vn.vlinks:
        emb = embedding.vlinks[v.id]
        overhead += Fraction(emb.total_rate) / Fraction(v.demand)
        disjoint += max_disjoint_paths([s.path for s in emb.splits])
        splits += len(emb.splits)
    return MetricsRow(
        instance=vn.name,
        accepted=True,
        ssu=embedding.ssu,
        overhead=overhead / n,
        max_disjoint=Fraction(disjoint, n),
        max_splits=Fraction(splits, n),
        objective=embedding.objective,
    )


# --- sweep ---------------------------------------------------------------------------


def _load_json(source, base: Path | None):
    if isinstance(source, Mapping):
        return source
    path = Path(source)
    if base is not None and not path.is_absolute():
        path = base / path
    return json.loads(path.read_text())


def load_scenario(source: str | Path | Mapping) -> tuple[dict, Path | None]:
    if isinstance(source, Mapping):
        return dict(source), None
    path = Path(source)
    try:
        return json.loads(path.read_text()), path.parent
    except json.JSONDecodeError as exc:
        raise ParseError(f"scenario is not valid JSON: {exc}") from exc


def scenario_instances(scn: Mapping, topo, base: Path | None) -> list[VnRequest]:
    vns = [load_vn(_load_json(v, base)) for v in scn.get("vns", [])]
    gen = scn.get("generator")
    if gen:
        seed = int(gen.get("seed", 0))
        for i in range(int(gen.get("count", 1))):
            vns.append(
                random_vn(
                    topo,
                    seed * 100003 + i,
                    int(gen.get("n_vnodes", 4)),
                    int(gen.get("n_vlinks", 5)),
                    tuple(gen.get("demands", range(100, 1001, 100))),
                    name=f"g{seed}-{i}",
                )
            )
    return vns


def sweep(
    scenario: str | Path | Mapping,
    out=None,
    params: EmbedParams | None = None,
    budget: ExactBudget | None = None,
    timing: bool | None = None,
) -> str:
    """Run every (instance, variant, bsr, solver) cell and return the CSV text.

    Each cell starts from an empty spectrum. runtime_ms is filled only with
    ``timing`` so that default output is reproducible byte for byte.
    """
    scn, base = load_scenario(scenario)
    try:
        topo = load_topology(_load_json(scn["topology"], base))
        variants = list(scn.get("variants", ["Flex-AT"]))
        bsrs = list(scn.get("bsr", [100]))
        solver = scn.get("solver", "heuristic")
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed scenario: {exc}") from exc
    if solver not in ("heuristic", "exact", "both"):
        raise ValidationError(f"unknown solver {solver!r}")
    p = dict(scn.get("params", {}))
    params = params or EmbedParams(k=int(p.get("k", 25)), q=int(p.get("q", 8)), sigma=int(p.get("sigma", 3)))
    budget = budget or ExactBudget(**scn.get("budget", {}))
    timing = bool(scn.get("timing", False)) if timing is None else timing
    reach_src = scn.get("reach")
    reach_doc = _load_json(reach_src, base) if reach_src is not None else None
    instances = scenario_instances(scn, topo, base)

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for vn in instances:
        for variant in variants:
            table = load_reach_table(reach_doc, variant)
            for bsr in bsrs:
                inst = with_bsr(vn, bsr)
                rows = []
                if solver in ("heuristic", "both"):
                    rows.append(_heuristic_cell(topo, table, inst, params, timing))
                if solver in ("exact", "both"):
                    rows.append(_exact_cell(topo, table, inst, params, budget, timing))
                if solver == "both" and rows[0].accepted and rows[1].accepted:
                    rows[0].cost_ratio = rows[0].objective / rows[1].objective
                for row in rows:
                    row.instance, row.variant, row.bsr = vn.name, variant, bsr
                    writer.writerow(row.as_csv_row())
    text = buf.getvalue()
    if out is not None:
        Path(out).write_text(text)
    return text


def _heuristic_cell(topo, table, vn, params, timing) -> MetricsRow:
    t0 = time.perf_counter()
    try:
        res = embed_vn(topo, table, vn, SpectrumState.for_topology(topo), params)
    except ValidationError:
        res = None
    ms = (time.perf_counter() - t0) * 1000 if timing else None
    if res is None or not res.accepted:
        return MetricsRow(solver="heuristic", runtime_ms=ms)
    row = compute_metrics(res, vn)
    row.solver, row.runtime_ms = "heuristic", ms
    return row


def _exact_cell(topo, table, vn, params, budget, timing) -> MetricsRow:
    t0 = time.perf_counter()
    res = solve_exact(topo, table, vn, budget, k=params.k, q=params.q)
    ms = (time.perf_counter() - t0) * 1000 if timing else None
    if res.status != "optimal":
        return MetricsRow(solver=f"exact" if res.status == "infeasible" else "exact:budget", runtime_ms=ms)
    row = compute_metrics(res.embedding, vn)
    row.solver, row.runtime_ms = "exact", ms
    return row
